"""
Modulated soliton decomposition, the modulation ODE system and the
renormalized radiation variable.

A field is written as

    psi(t, x) = e^{ip(x - s)} e^{ig} (phi_w(x - s) + u(t, x - s))

with (w, g, p, s) chosen so that the four pairings <U, s2 Y_j,w>, U = (u, conj u),
vanish.  For J-invariant U these pairings are real:

    K1 = -2 int Re(u) phi,       K2 = -2 int Im(u) d_w phi,
    K3 = -2 int Im(u) phi',      K4 = -2 int Re(u) y phi.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.integrate import cumulative_trapezoid

from nlslab.classes.grid_field import (
    ComplexField,
    Grid,
    VectorField,
    fourier_shift,
    inner_product_vector,
    multiply,
    pauli_1,
    pauli_2,
    spectral_derivative,
    spectral_derivative_vector,
    vector_h1_norm,
)
from nlslab.classes.linop import eigenfunction_Y, eigenfunction_Y_domega, kernel_basis, resonance_Phi
from nlslab.classes.nls_solver import Trajectory
from nlslab.classes.soliton import (
    SolitonParams,
    phi,
    phi_domega,
    phi_domega2,
    phi_dx,
    phi_dx_domega,
)
from nlslab.config import DEFAULT_EXPERIMENT, FIT_CONFIG
from nlslab.errors import ModulationFitError
from nlslab.logging_helpers import get_logger
from nlslab.workspace.series_store import TimeSeries

logger = get_logger("modulation")

PARAMETER_NAMES = ("omega", "gamma", "p", "sigma")


@dataclass(frozen=True)
class ModulationState:
    """Fitted parameters of one frame and the radiation in the moving frame y = x - sigma."""

    t: float
    params: SolitonParams
    U: VectorField
    newton_residual: float
    iterations: int = 0

    def orthogonality(self) -> np.ndarray:
        basis = kernel_basis(self.params.omega, self.U.grid)
        return np.array([inner_product_vector(self.U, pauli_2(Y)).real for Y in basis])

    def radiation_h1(self) -> float:
        """||U||_{H^1} over both slots."""
        return vector_h1_norm(self.U)


@dataclass
class ModulationSeries:
    """Parameter paths of a run; truncated at the first frame that fails to fit."""

    states: List[ModulationState] = field(default_factory=list)
    failure: Optional[str] = None
    failure_time: Optional[float] = None

    def __len__(self) -> int:
        return len(self.states)

    @property
    def t(self) -> np.ndarray:
        return np.array([state.t for state in self.states])

    def parameter(self, name: str) -> np.ndarray:
        index = PARAMETER_NAMES.index(name)
        return np.array([state.params.as_array()[index] for state in self.states])

    @property
    def omega(self) -> np.ndarray:
        return self.parameter("omega")

    @property
    def gamma(self) -> np.ndarray:
        return self.parameter("gamma")

    @property
    def p(self) -> np.ndarray:
        return self.parameter("p")

    @property
    def sigma(self) -> np.ndarray:
        return self.parameter("sigma")

    @property
    def newton_residuals(self) -> np.ndarray:
        return np.array([state.newton_residual for state in self.states])

    def radiation_h1(self) -> np.ndarray:
        return np.array([state.radiation_h1() for state in self.states])

    def orbital_bound(self) -> float:
        """sup_t ||U(t)||_{H^1} over the fitted frames."""
        return float(np.max(self.radiation_h1())) if self.states else 0.0

    def to_time_series(self, omega_bar: Optional[float] = None, p_bar: Optional[float] = None,
                       name: str = "modulation") -> TimeSeries:
        """
        Flatten to t, omega, gamma, p, sigma, theta1, theta2, newton_residual, orth1..orth4.

        The phases use omega_bar = omega(T) and p_bar = p(T) unless given.
        """
        omega_bar = self.omega[-1] if omega_bar is None else omega_bar
        p_bar = self.p[-1] if p_bar is None else p_bar
        if len(self) >= 3:
            renormalized = renormalize(self, omega_bar, p_bar, with_fields=False)
            theta1, theta2 = renormalized.theta1, renormalized.theta2
        else:
            theta1 = theta2 = np.zeros(len(self))
        orthogonality = np.array([state.orthogonality() for state in self.states]).reshape(-1, 4)
        columns = {name_: self.parameter(name_) for name_ in PARAMETER_NAMES}
        columns.update({
            "theta1": theta1,
            "theta2": theta2,
            "newton_residual": self.newton_residuals,
        })
        for j in range(4):
            columns[f"orth{j + 1}"] = orthogonality[:, j]
        return TimeSeries(name, self.t, columns)


def _moving_frame(psi: ComplexField, params: SolitonParams) -> Tuple[np.ndarray, np.ndarray]:
    """Gauge-removed field w(y) = e^{-ipy - ig} psi(y + s) and the gauge factor."""
    y = psi.grid.x
    gauge = np.exp(-1j * (params.p * y + params.gamma))
    return gauge * fourier_shift(psi, params.sigma).values, gauge


def radiation(psi: ComplexField, params: SolitonParams) -> VectorField:
    """
    Radiation U = (u, conj u) with u(y) = e^{-ipy - ig} psi(y + s) - phi_w(y).

    Args:
        psi: Field on the lab-frame grid
        params: Modulation parameters

    Returns:
        J-invariant vector field on the moving-frame grid
    """
    w, _ = _moving_frame(psi, params)
    u = w - phi(params.omega, psi.grid.x)
    return VectorField.from_scalar(ComplexField(psi.grid, u))


def orthogonality_residuals(psi: ComplexField, params: SolitonParams) -> np.ndarray:
    """The four real pairings <U, s2 Y_j,w>, j = 1..4."""
    U = radiation(psi, params)
    basis = kernel_basis(params.omega, psi.grid)
    return np.array([inner_product_vector(U, pauli_2(Y)).real for Y in basis])


def _kernel_profiles(omega: float, y: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """First slots y_j of Y_j and of d_w Y_j, so that K_j = -2 Im int u y_j."""
    profile = phi(omega, y)
    profile_dw = phi_domega(omega, y)
    slots = [1j * profile, profile_dw, phi_dx(omega, y), 1j * y * profile]
    slots_dw = [1j * profile_dw, phi_domega2(omega, y), phi_dx_domega(omega, y), 1j * y * profile_dw]
    return slots, slots_dw


def _analytic_jacobian(psi: ComplexField, params: SolitonParams) -> np.ndarray:
    grid = psi.grid
    y = grid.x
    w, gauge = _moving_frame(psi, params)
    u = w - phi(params.omega, y)
    slots, slots_dw = _kernel_profiles(params.omega, y)

    derivative = gauge * fourier_shift(spectral_derivative(psi, 1), params.sigma).values
    variations = {
        "gamma": -1j * w,
        "p": -1j * y * w,
        "sigma": derivative,
    }
    du_domega = -phi_domega(params.omega, y)

    def pairing(values: np.ndarray, slot: np.ndarray) -> float:
        return float(-2.0 * np.imag(np.sum(values * slot)) * grid.dx)

    jacobian = np.zeros((4, 4))
    for j, (slot, slot_dw) in enumerate(zip(slots, slots_dw)):
        jacobian[j, 0] = pairing(du_domega, slot) + pairing(u, slot_dw)
        for column, name in enumerate(("gamma", "p", "sigma"), start=1):
            jacobian[j, column] = pairing(variations[name], slot)
    return jacobian


def _finite_difference_jacobian(psi: ComplexField, params: SolitonParams, step: float) -> np.ndarray:
    base = params.as_array()
    jacobian = np.zeros((4, 4))
    for column in range(4):
        offset = np.zeros(4)
        offset[column] = step
        forward = orthogonality_residuals(psi, SolitonParams.from_array(base + offset))
        backward = orthogonality_residuals(psi, SolitonParams.from_array(base - offset))
        jacobian[:, column] = (forward - backward) / (2.0 * step)
    return jacobian


def modulation_jacobian(psi: ComplexField, params: SolitonParams,
                        method: str = FIT_CONFIG["jacobian"]) -> np.ndarray:
    """
    Derivative of the orthogonality pairings with respect to (omega, gamma, p, sigma).

    Args:
        psi: Field on the lab-frame grid
        params: Point of evaluation
        method: "analytic" or "finite-difference"

    Returns:
        Real 4x4 matrix, rows K1..K4
    """
    if method == "analytic":
        return _analytic_jacobian(psi, params)
    if method == "finite-difference":
        return _finite_difference_jacobian(psi, params, FIT_CONFIG["fd_step"])
    raise ValueError(f"unknown jacobian method '{method}'")


def estimate_seed(psi: ComplexField) -> SolitonParams:
    """Crude parameters read off the peak of |psi|: location, height, phase and phase slope."""
    values = psi.values
    peak = int(np.argmax(np.abs(values)))
    amplitude = float(np.abs(values[peak]))
    if amplitude == 0.0:
        raise ModulationFitError("cannot seed a fit on a vanishing field", np.inf, None)
    derivative = spectral_derivative(psi, 1).values[peak]
    momentum = float(np.imag(derivative * np.conj(values[peak])) / amplitude ** 2)
    return SolitonParams(
        omega=0.5 * amplitude ** 2,
        gamma=float(np.angle(values[peak])),
        p=momentum,
        sigma=float(psi.grid.x[peak]),
    )


def fit_parameters(psi: ComplexField, seed: SolitonParams, t: float = 0.0,
                   tolerance: float = DEFAULT_EXPERIMENT["tolerances"]["newton"],
                   method: str = FIT_CONFIG["jacobian"]) -> ModulationState:
    """
    Damped Newton iteration on the four orthogonality conditions.

    Args:
        psi: Field on the lab-frame grid
        seed: Starting parameters
        t: Time stamp stored on the state
        tolerance: Target for max_j |K_j|
        method: Jacobian assembly, "analytic" or "finite-difference"

    Returns:
        ModulationState with residual below tolerance

    Raises:
        ModulationFitError: if Newton stalls or does not converge in newton_max_iter steps
    """
    current = seed.as_array()
    pairings = orthogonality_residuals(psi, seed)
    residual = float(np.max(np.abs(pairings)))

    iterations = 0
    while residual >= tolerance:
        if iterations == FIT_CONFIG["newton_max_iter"]:
            raise ModulationFitError(
                f"Newton did not converge in {iterations} iterations at t={t:.6g}",
                residual, SolitonParams.from_array(current))
        iterations += 1
        jacobian = modulation_jacobian(psi, SolitonParams.from_array(current), method)
        try:
            step = scipy.linalg.solve(jacobian, -pairings)
        except (scipy.linalg.LinAlgError, ValueError) as error:
            raise ModulationFitError(f"singular Jacobian at t={t:.6g}: {error}", residual,
                                     SolitonParams.from_array(current)) from error

        scale = 1.0
        for _ in range(FIT_CONFIG["newton_max_halvings"] + 1):
            trial = current + scale * step
            if trial[0] > 0:
                trial_pairings = orthogonality_residuals(psi, SolitonParams.from_array(trial))
                trial_residual = float(np.max(np.abs(trial_pairings)))
                if trial_residual < residual:
                    break
            scale *= 0.5
        else:
            raise ModulationFitError(
                f"Newton stalled at t={t:.6g} after {iterations} iterations",
                residual, SolitonParams.from_array(current))

        current, pairings, residual = trial, trial_pairings, trial_residual
        logger.debug(f"Newton {iterations}: residual {residual:.3e}, step scale {scale}")

    params = SolitonParams.from_array(current)
    return ModulationState(t, params, radiation(psi, params), residual, iterations)


def _extrapolate(params: SolitonParams, dt: float) -> SolitonParams:
    return SolitonParams(params.omega, params.gamma + (params.omega + params.p ** 2) * dt,
                         params.p, params.sigma + 2.0 * params.p * dt)


def track(traj: Trajectory, seed: Optional[SolitonParams] = None,
          method: str = FIT_CONFIG["jacobian"],
          tolerance: float = DEFAULT_EXPERIMENT["tolerances"]["newton"]) -> ModulationSeries:
    """
    Fit every stored frame, seeding each fit with the free soliton flow of the previous one.

    Args:
        traj: Solver trajectory
        seed: Parameters for the first frame; read off the field when None
        method: Jacobian assembly
        tolerance: Newton tolerance

    Returns:
        ModulationSeries, truncated with a failure record if a frame does not fit
    """
    series = ModulationSeries()
    guess = estimate_seed(traj.snapshots[0]) if seed is None else seed
    previous_t = traj.times[0]
    for t, psi in zip(traj.times, traj.snapshots):
        if series.states:
            guess = _extrapolate(series.states[-1].params, t - previous_t)
        try:
            state = fit_parameters(psi, guess, t, tolerance, method)
        except ModulationFitError as error:
            logger.warning(f"Modulation tracking stopped at t={t:.6g}: {error}")
            series.failure = str(error)
            series.failure_time = t
            break
        series.states.append(state)
        previous_t = t

    if series.states:
        last = series.states[-1].params
        logger.info(f"Tracked {len(series)} frames; final omega={last.omega:.8f}, p={last.p:.3e}")
    return series


def modulation_matrix_constant(omega: float) -> np.ndarray:
    """Leading part M1(w) with c_w = 2 w^{-1/2} and ||phi_w||^2 = 4 w^{1/2}."""
    c = 2.0 / np.sqrt(omega)
    mass = 4.0 * np.sqrt(omega)
    return np.array([
        [0.0, c, 0.0, 0.0],
        [c, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -mass],
        [0.0, 0.0, mass, 0.0],
    ], dtype=complex)


def assemble_M(U: VectorField, omega: float) -> np.ndarray:
    """
    Modulation matrix M = M1(w) + M2(U, w).

    Row j of M2 pairs U against s1 Y_j, s2 d_w Y_j, -s2 d_y Y_j and y s1 Y_j.
    """
    grid = U.grid
    matrix = modulation_matrix_constant(omega)
    for j in range(1, 5):
        Y = eigenfunction_Y(omega, j, grid)
        partners = (
            pauli_1(Y),
            pauli_2(eigenfunction_Y_domega(omega, j, grid)),
            pauli_2(spectral_derivative_vector(Y, 1)) * -1.0,
            multiply(pauli_1(Y), grid.x),
        )
        for column, partner in enumerate(partners):
            matrix[j - 1, column] += inner_product_vector(U, partner)
    return matrix


def quadratic_Q(U: VectorField, omega: float) -> VectorField:
    """(-phi (u^2 + 2 u v), phi (v^2 + 2 u v)) for U = (u, v)."""
    profile = phi(omega, U.grid.x)
    u, v = U.first, U.second
    return VectorField(U.grid, -profile * (u ** 2 + 2 * u * v), profile * (v ** 2 + 2 * u * v))


def cubic_C(U: VectorField) -> VectorField:
    u, v = U.first, U.second
    return VectorField(U.grid, -u * v * u, v * u * v)


def nonlinearity_N(U: VectorField, omega: float) -> VectorField:
    """N(U) = Q_w(U) + C(U); i N(U) is J-invariant whenever U is."""
    return quadratic_Q(U, omega) + cubic_C(U)


def modulation_rhs(U: VectorField, omega: float) -> np.ndarray:
    """Vector of <i N(U), s2 Y_j,w>, j = 1..4."""
    forcing = nonlinearity_N(U, omega) * 1j
    return np.array([inner_product_vector(forcing, pauli_2(Y)) for Y in kernel_basis(omega, U.grid)])


def parameter_rates(series: ModulationSeries) -> Dict[str, np.ndarray]:
    """Time derivatives of the parameter paths by second-order centered differences."""
    if len(series) < 3:
        raise ValueError("at least three fitted frames are needed for centered differences")
    t = series.t
    return {name: np.gradient(series.parameter(name), t, edge_order=2) for name in PARAMETER_NAMES}


def modulation_unknowns(series: ModulationSeries) -> np.ndarray:
    """Rows (g' + p^2 - w - p s', w', s' - 2p, p') at every frame."""
    rates = parameter_rates(series)
    omega, p = series.omega, series.p
    return np.column_stack([
        rates["gamma"] + p ** 2 - omega - p * rates["sigma"],
        rates["omega"],
        rates["sigma"] - 2.0 * p,
        rates["p"],
    ])


def verify_modulation_odes(series: ModulationSeries) -> TimeSeries:
    """
    Residual of M v - <i N(U), s2 Y_j> at the interior frames.

    Returns:
        TimeSeries with residual_1..residual_4, residual_max and rhs_max
    """
    unknowns = modulation_unknowns(series)
    residuals = []
    scales = []
    for state, v in zip(series.states, unknowns):
        rhs = modulation_rhs(state.U, state.params.omega)
        lhs = assemble_M(state.U, state.params.omega) @ v
        residuals.append(np.abs(lhs - rhs))
        scales.append(np.max(np.abs(rhs)))
    residuals = np.array(residuals)[1:-1]
    columns = {f"residual_{j + 1}": residuals[:, j] for j in range(4)}
    columns["residual_max"] = residuals.max(axis=1)
    columns["rhs_max"] = np.array(scales)[1:-1]
    logger.info(f"Modulation ODE residual max {columns['residual_max'].max():.3e} "
                f"over {residuals.shape[0]} interior frames")
    return TimeSeries("modulation_residual", series.t[1:-1], columns)


@dataclass
class RenormalizedRadiation:
    """V(t) = e^{i(p(t) - p_bar) y s3} U(t) and the accumulated phases."""

    t: np.ndarray
    omega_bar: float
    p_bar: float
    V: List[VectorField]
    theta1: np.ndarray
    theta2: np.ndarray
    theta1_dot: np.ndarray
    theta2_dot: np.ndarray
    identity_defects: np.ndarray

    def max_identity_defect(self) -> float:
        return float(np.max(self.identity_defects)) if self.identity_defects.size else 0.0


def renormalize(series: ModulationSeries, omega_bar: float, p_bar: float,
                with_fields: bool = True) -> RenormalizedRadiation:
    """
    Renormalized radiation and phases relative to the frozen (omega_bar, p_bar).

    theta1' = w - w_ + (s' - 2p_)(p - p_) - (p - p_)^2 + (g' + p^2 - w - p s')
    theta2' = s' - 2p + 2(p - p_)

    These satisfy theta1' = g' - p_^2 - w_ - p_ theta2' and theta2' = s' - 2p_, whose
    pointwise defects are returned for cross-checking.

    Args:
        series: Tracked parameters, at least three frames
        omega_bar: Frozen scaling parameter, positive
        p_bar: Frozen momentum
        with_fields: Also build V(t) for every frame

    Returns:
        RenormalizedRadiation with theta1(t[0]) = theta2(t[0]) = 0
    """
    if not omega_bar > 0:
        raise ValueError(f"omega_bar must be positive, got {omega_bar}")
    rates = parameter_rates(series)
    t, omega, p = series.t, series.omega, series.p
    offset = p - p_bar
    gamma_dot, sigma_dot = rates["gamma"], rates["sigma"]

    theta1_dot = (omega - omega_bar + (sigma_dot - 2.0 * p_bar) * offset - offset ** 2
                  + (gamma_dot + p ** 2 - omega - p * sigma_dot))
    theta2_dot = sigma_dot - 2.0 * p + 2.0 * offset
    defects = np.maximum(
        np.abs(theta1_dot - (gamma_dot - p_bar ** 2 - omega_bar - p_bar * theta2_dot)),
        np.abs(theta2_dot - (sigma_dot - 2.0 * p_bar)),
    )

    fields = []
    if with_fields:
        for state, shift in zip(series.states, offset):
            gauge = np.exp(1j * shift * state.U.grid.x)
            fields.append(VectorField(state.U.grid, gauge * state.U.first, np.conj(gauge) * state.U.second,
                                      j_invariant=state.U.j_invariant))

    return RenormalizedRadiation(
        t=t,
        omega_bar=omega_bar,
        p_bar=p_bar,
        V=fields,
        theta1=cumulative_trapezoid(theta1_dot, t, initial=0.0),
        theta2=cumulative_trapezoid(theta2_dot, t, initial=0.0),
        theta1_dot=theta1_dot,
        theta2_dot=theta2_dot,
        identity_defects=defects,
    )


def source_terms(omega: float, grid: Grid) -> Tuple[VectorField, VectorField, VectorField]:
    """
    Localized sources of the quadratic term built from the threshold resonance
    (R1, R2) = (tanh^2, -sech^2)/sqrt(2 pi) and phi_w:

        Q1 = (-phi (R1^2 + 2 R1 R2),               phi (R2^2 + 2 R1 R2))
        Q2 = ( 2 phi (R1^2 + R2^2 + R1 R2),        -2 phi (R1^2 + R2^2 + R1 R2))
        Q3 = (-phi (R2^2 + 2 R1 R2),               phi (R1^2 + 2 R1 R2))
    """
    profile = phi(omega, grid.x)
    resonance = resonance_Phi(omega, 1, grid)
    r1, r2 = resonance.first.real, resonance.second.real
    mixed = 2.0 * r1 * r2
    symmetric = 2.0 * profile * (r1 ** 2 + r2 ** 2 + r1 * r2)
    return (
        VectorField(grid, -profile * (r1 ** 2 + mixed), profile * (r2 ** 2 + mixed)),
        VectorField(grid, symmetric, -symmetric),
        VectorField(grid, -profile * (r2 ** 2 + mixed), profile * (r1 ** 2 + mixed)),
    )

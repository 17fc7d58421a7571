"""
Extraction of the late-time objects of a perturbed soliton run and fits of
their decay rates.

Pipeline: trajectory -> modulation series -> renormalized radiation V(t) ->
distorted spectra of V(t) every `spectrum_stride` frames -> amplitudes h1, h2,
remainders, scattering profiles W_+-, asymptotic field and power-law fits.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.stats import linregress

from nlslab.classes.grid_field import ComplexField, Grid, VectorField
from nlslab.classes.linop import project_discrete, project_essential, resonance_Phi
from nlslab.classes.spectral_identities import QuadraticCoefficients, frakq_coefficients
from nlslab.config import DECAY_CHECKS, DEFAULT_EXPERIMENT, FIT_CONFIG, TOLERANCES, decay_band
from nlslab.errors import DecayFitError
from nlslab.logging_helpers import get_logger
from nlslab.transform.distorted_ft import (
    DistortedSpectrum,
    FrequencyGrid,
    dft_forward,
    propagate_spectrum,
    scattering_relation_defect,
    symbol_m1,
    symbol_m2,
)
from nlslab.transform.modulation import ModulationSeries, RenormalizedRadiation, renormalize
from nlslab.workspace.series_store import TimeSeries

logger = get_logger("asymptotics")

SUMMARY_SCHEMA = ("quantity", "slope", "stderr", "predicted", "pass")


@dataclass(frozen=True)
class DecayFit:
    """Log-log regression of one decay quantity."""

    quantity: str
    t_min: float
    t_max: float
    slope: float
    stderr: float
    predicted: float
    band: Tuple[float, float]
    n_samples: int

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise ValueError(f"empty fit window [{self.t_min}, {self.t_max}] for {self.quantity}")

    @property
    def passed(self) -> bool:
        return bool(self.band[0] <= self.slope <= self.band[1])

    def as_row(self) -> Dict[str, object]:
        return {
            "quantity": self.quantity,
            "slope": self.slope,
            "stderr": self.stderr,
            "predicted": self.predicted,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ScatteringProfile:
    """Asymptotic profiles W_+, W_- and their stability across extraction times."""

    fgrid: FrequencyGrid
    W_plus: np.ndarray
    W_minus: np.ndarray
    extraction_times: Tuple[float, ...]
    stability: float
    stable: bool
    tolerance: float = float("nan")

    def __post_init__(self):
        for name in ("W_plus", "W_minus"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} holds non-finite samples")

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.W_plus)), np.max(np.abs(self.W_minus))))

    def as_columns(self) -> Dict[str, np.ndarray]:
        return {"xi": self.fgrid.nodes, "W_plus": self.W_plus, "W_minus": self.W_minus}


@dataclass
class SpectrumSeries:
    """Distorted transforms F_+-[V(t)] relative to a frozen omega_bar, with the phases at those times."""

    omega_bar: float
    p_bar: float
    t: np.ndarray
    frames: np.ndarray
    transforms: List[DistortedSpectrum]
    V: List[VectorField]
    theta1: np.ndarray
    theta2: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return len(self.transforms)

    @property
    def fgrid(self) -> FrequencyGrid:
        return self.transforms[0].fgrid

    def profile(self, index: int) -> DistortedSpectrum:
        """f_+ = e^{it(xi^2 + w)} F_+[V(t)], f_- = e^{-it(xi^2 + w)} F_-[V(t)]."""
        return propagate_spectrum(self.transforms[index], self.t[index])

    def scattering_defects(self) -> np.ndarray:
        return np.array([scattering_relation_defect(S) for S in self.transforms])


def cutoff_chi0(xi: np.ndarray) -> np.ndarray:
    """
    Smooth even bump: 1 on |xi| <= 1, 0 on |xi| >= 2, and
    g(2 - |xi|) / (g(2 - |xi|) + g(|xi| - 1)) between, with g(s) = e^{-1/s} for s > 0.
    """
    magnitude = np.abs(np.asarray(xi, dtype=float))

    def g(s: np.ndarray) -> np.ndarray:
        positive = s > 0
        return np.where(positive, np.exp(-1.0 / np.where(positive, s, 1.0)), 0.0)

    inner, outer = g(2.0 - magnitude), g(magnitude - 1.0)
    return inner / (inner + outer)


def build_spectrum_series(series: ModulationSeries, fgrid: FrequencyGrid,
                          stride: int = DEFAULT_EXPERIMENT["frozen"]["spectrum_stride"],
                          omega_bar: Optional[float] = None, p_bar: Optional[float] = None
                          ) -> Tuple[SpectrumSeries, RenormalizedRadiation]:
    """
    Transform V(t) at every `stride`-th fitted frame (and the last one).

    Args:
        series: Tracked modulation parameters
        fgrid: Frequency nodes
        stride: Frames between transforms
        omega_bar: Frozen scaling parameter, omega(T) when None
        p_bar: Frozen momentum, p(T) when None

    Returns:
        (SpectrumSeries, RenormalizedRadiation over all frames)
    """
    omega_bar = series.omega[-1] if omega_bar is None else omega_bar
    p_bar = series.p[-1] if p_bar is None else p_bar
    renormalized = renormalize(series, omega_bar, p_bar)

    indices = list(range(0, len(series), max(1, stride)))
    if indices[-1] != len(series) - 1:
        indices.append(len(series) - 1)

    transforms = [dft_forward(renormalized.V[i], omega_bar, fgrid) for i in indices]
    logger.info(f"Computed {len(transforms)} distorted spectra on {fgrid.n_xi} frequencies")
    return SpectrumSeries(
        omega_bar=omega_bar,
        p_bar=p_bar,
        t=renormalized.t[indices],
        frames=np.array(indices),
        transforms=transforms,
        V=[renormalized.V[i] for i in indices],
        theta1=renormalized.theta1[indices],
        theta2=renormalized.theta2[indices],
        p=series.p[indices],
    ), renormalized


def _filtered_rate(t: np.ndarray, values: np.ndarray) -> np.ndarray:
    if t.size < 3:
        return np.zeros_like(values)
    return np.gradient(values, t, edge_order=2)


def amplitudes_h(spectra: SpectrumSeries) -> TimeSeries:
    """
    Low-frequency amplitudes h1 = int chi0 F_+[V(t)] dxi and h2 = int chi0 F_-[V(t)] dxi,
    which equal e^{-+itw} int e^{-+it xi^2} chi0 f_+- dxi for the profiles f_+-.

    Returns:
        TimeSeries with complex h1, h2, their moduli and the moduli of
        d/dt (e^{itw} h1) and d/dt (e^{-itw} h2)
    """
    weights = spectra.fgrid.weights * cutoff_chi0(spectra.fgrid.nodes)
    h1 = np.array([np.sum(weights * S.f_plus) for S in spectra.transforms])
    h2 = np.array([np.sum(weights * S.f_minus) for S in spectra.transforms])
    phase = np.exp(1j * spectra.t * spectra.omega_bar)
    return TimeSeries("amplitudes_h", spectra.t, {
        "h1": h1,
        "h2": h2,
        "abs_h1": np.abs(h1),
        "abs_h2": np.abs(h2),
        "h1_filtered_dt": np.abs(_filtered_rate(spectra.t, phase * h1)),
        "h2_filtered_dt": np.abs(_filtered_rate(spectra.t, np.conj(phase) * h2)),
    })


def remainder_R(V_e: VectorField, h1: complex, h2: complex, omega_bar: float) -> Tuple[ComplexField, ComplexField]:
    """
    R_v = v_e - h1 Phi_1 + h2 Phi_2 and R_vbar = vbar_e - h1 Phi_2 + h2 Phi_1 for the
    resonance components (Phi_1, Phi_2) = (tanh^2, -sech^2)/sqrt(2 pi).
    """
    resonance = resonance_Phi(omega_bar, 1, V_e.grid)
    phi_1, phi_2 = resonance.first, resonance.second
    return (ComplexField(V_e.grid, V_e.first - h1 * phi_1 + h2 * phi_2),
            ComplexField(V_e.grid, V_e.second - h1 * phi_2 + h2 * phi_1))


def local_decay_series(spectra: SpectrumSeries, amplitudes: TimeSeries) -> TimeSeries:
    """Weighted norms ||<y>^{-2} R||_inf of both remainder components."""
    weighted = []
    for V, h1, h2 in zip(spectra.V, amplitudes["h1"], amplitudes["h2"]):
        essential = project_essential(V, spectra.omega_bar)
        weight = 1.0 / (1.0 + V.grid.x ** 2)
        r_v, r_vbar = remainder_R(essential, h1, h2, spectra.omega_bar)
        weighted.append(max(np.max(np.abs(r_v.values) * weight), np.max(np.abs(r_vbar.values) * weight)))
    return TimeSeries("remainder_local", spectra.t, {"remainder_local": np.array(weighted)})


def discrete_coefficients_series(spectra: SpectrumSeries) -> TimeSeries:
    """Coefficients d_j of P_d V(t) relative to omega_bar."""
    coefficients = np.array([project_discrete(V, spectra.omega_bar)[0].as_array() for V in spectra.V])
    columns = {f"d{j + 1}": coefficients[:, j] for j in range(4)}
    columns["discrete_coefficients"] = np.max(np.abs(coefficients), axis=1)
    return TimeSeries("discrete_coefficients", spectra.t, columns)


def spectrum_bound_series(spectra: SpectrumSeries) -> TimeSeries:
    """sup_xi |f_+-(t, xi)| and its ratio to the value at the first time >= 1."""
    sup = np.array([S.sup_norm() for S in spectra.transforms])
    reference_index = int(np.searchsorted(spectra.t, 1.0))
    reference_index = min(reference_index, sup.size - 1)
    reference = max(sup[reference_index], np.finfo(float).tiny)
    return TimeSeries("spectrum_bound", spectra.t, {"sup_spectrum": sup, "growth": sup / reference})


def decay_slope(series: TimeSeries, column: str, t_min: float, t_max: float,
                quantity: Optional[str] = None) -> DecayFit:
    """
    Least-squares slope of log(value) against log(t) on [t_min, t_max].

    Args:
        series: Source series
        column: Column holding the decaying quantity
        t_min: Window start
        t_max: Window end
        quantity: Key of DECAY_CHECKS for the predicted exponent and band, column when None

    Returns:
        DecayFit

    Raises:
        DecayFitError: on nonpositive samples or fewer than three samples in the window
    """
    quantity = column if quantity is None else quantity
    window = series.window(t_min, t_max)
    values = np.abs(window[column]) if np.iscomplexobj(window[column]) else window[column]
    if window.t.size < 3:
        raise DecayFitError(f"{quantity}: {window.t.size} samples in [{t_min}, {t_max}]")
    if np.any(values <= 0) or np.any(window.t <= 0):
        raise DecayFitError(f"{quantity}: nonpositive samples in [{t_min}, {t_max}]")

    fit = linregress(np.log(window.t), np.log(values))
    if quantity in DECAY_CHECKS:
        predicted, band = DECAY_CHECKS[quantity]["predicted"], decay_band(quantity)
    else:
        predicted, band = float("nan"), (float("-inf"), float("inf"))
    return DecayFit(quantity, float(window.t[0]), float(window.t[-1]), float(fit.slope),
                    float(fit.stderr), predicted, tuple(band), int(window.t.size))


def _log_phase(spectra: SpectrumSeries, sign: int) -> np.ndarray:
    """Lambda(t, xi) = 1/2 int_1^t |f(s, xi)|^2 ds / s at every spectrum time."""
    moduli = np.array([np.abs(S.f_plus if sign == 1 else S.f_minus) ** 2 for S in spectra.transforms])
    start = int(np.searchsorted(spectra.t, 1.0))
    phases = np.zeros_like(moduli)
    if spectra.t.size - start >= 2:
        phases[start:] = 0.5 * cumulative_trapezoid(moduli[start:] / spectra.t[start:, None],
                                                    spectra.t[start:], axis=0, initial=0.0)
    return phases


def _profiles_W(spectra: SpectrumSeries) -> Tuple[np.ndarray, np.ndarray]:
    xi = spectra.fgrid.nodes
    lam_plus, lam_minus = _log_phase(spectra, 1), _log_phase(spectra, -1)
    W_plus, W_minus = [], []
    for index in range(len(spectra)):
        profile = spectra.profile(index)
        rotation = np.exp(1j * spectra.theta1[index] - 1j * spectra.theta2[index] * xi)
        W_plus.append(np.exp(-1j * lam_plus[index]) * rotation * profile.f_plus)
        counter = np.exp(-1j * spectra.theta1[index] - 1j * spectra.theta2[index] * xi)
        W_minus.append(np.exp(1j * lam_minus[index]) * counter * profile.f_minus)
    return np.array(W_plus), np.array(W_minus)


def _extraction_indices(t: np.ndarray, usable: np.ndarray, count: int) -> np.ndarray:
    """Spectrum indices nearest to `count` evenly spaced targets on [span t_max, t_max]."""
    if usable.size <= count:
        return usable
    t_max = t[usable[-1]]
    targets = np.linspace(FIT_CONFIG["w_extraction_span"] * t_max, t_max, count)
    return np.array(sorted({int(usable[np.argmin(np.abs(t[usable] - target))]) for target in targets}))


def extract_W(spectra: SpectrumSeries, count: int = FIT_CONFIG["w_extraction_count"],
              t_max: Optional[float] = None, epsilon: Optional[float] = None) -> ScatteringProfile:
    """
    W_+ = e^{-i Lambda_+} e^{i theta1} e^{-i theta2 xi} f_+ and
    W_- = e^{i Lambda_-} e^{-i theta1} e^{-i theta2 xi} f_- at `count` times spread over
    the second half of [0, t_max].

    The returned profile is the latest extraction. Stability is the largest sup-norm
    change between any two extraction times; the profile is stable when it stays below
    w_stability * eps^2 * t_a^{-0.05}, t_a the earliest extraction time.

    Args:
        spectra: Distorted spectra of the run
        count: Number of extraction times
        t_max: Latest usable time, the last spectrum time when None
        epsilon: Perturbation size, sup |v(0)| when None

    Returns:
        ScatteringProfile
    """
    W_plus, W_minus = _profiles_W(spectra)
    limit = spectra.t[-1] if t_max is None else t_max
    chosen = _extraction_indices(spectra.t, np.flatnonzero(spectra.t <= limit), count)
    changes = [max(np.max(np.abs(W_plus[b] - W_plus[a])), np.max(np.abs(W_minus[b] - W_minus[a])))
               for a, b in combinations(chosen, 2)]
    stability = float(max(changes)) if changes else 0.0

    epsilon = float(np.max(np.abs(spectra.V[0].first))) if epsilon is None else float(epsilon)
    t_a = max(float(spectra.t[chosen[0]]), 1.0)
    tolerance = max(TOLERANCES["w_stability"] * epsilon ** 2 * t_a ** -0.05, TOLERANCES["w_stability_floor"])
    stable = stability <= tolerance
    if not stable:
        logger.warning(f"W extraction moved by {stability:.3e} (band {tolerance:.3e}) "
                       f"across t={spectra.t[chosen].tolist()}")
    return ScatteringProfile(spectra.fgrid, W_plus[chosen[-1]], W_minus[chosen[-1]],
                             tuple(float(v) for v in spectra.t[chosen]), stability, bool(stable), tolerance)


def profile_relation_defect(profile: ScatteringProfile, omega_bar: float) -> float:
    """Max defect of W_-(xi) = -((|xi| - i a)^2 / (|xi| + i a)^2) conj(W_+(-xi))."""
    xi = profile.fgrid.nodes
    root = np.sqrt(omega_bar)
    ratio = (np.abs(xi) - 1j * root) ** 2 / (np.abs(xi) + 1j * root) ** 2
    return float(np.max(np.abs(profile.W_minus + ratio * np.conj(profile.W_plus[::-1]))))


def _sample(values: np.ndarray, nodes: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return np.interp(xi, nodes, values.real) + 1j * np.interp(xi, nodes, values.imag)


def asymptotic_field(t: float, grid: Grid, profile: ScatteringProfile, omega_bar: float, p_bar: float,
                     theta1: float, theta2: float, p: float) -> Tuple[ComplexField, bool]:
    """
    Two-term asymptotic radiation on the moving-frame grid y, xi* = y / 2t:

        u_inf = e^{i(p_ - p)y} (2t)^{-1/2} [ e^{i W0} e^{i L+} W_+(xi*) m1(y, xi*)
                                            - e^{-i W0} e^{-i L-} W_-(-xi*) m2(y, -xi*) ]

    with W0 = -pi/4 - t w_ + t xi*^2 - theta1 + theta2 xi* and L+- = 1/2 log t |W_+-(+-xi*)|^2.

    Returns:
        (u_inf, clamped); clamped is True when some |xi*| exceeds the profile grid and
        the profiles were held at their edge values there
    """
    if not t >= 1.0:
        raise ValueError(f"t must be >= 1, got {t}")
    y = grid.x
    xi_star = y / (2.0 * t)
    nodes = profile.fgrid.nodes
    clamped = bool(np.max(np.abs(xi_star)) > profile.fgrid.xi_max)
    if clamped:
        logger.warning(f"xi* reaches {np.max(np.abs(xi_star)):.2f} beyond xi_max={profile.fgrid.xi_max}; clamped")

    W_plus = _sample(profile.W_plus, nodes, xi_star)
    W_minus = _sample(profile.W_minus, nodes, -xi_star)
    phase = -0.25 * np.pi - t * omega_bar + t * xi_star ** 2 - theta1 + theta2 * xi_star
    log_t = np.log(t)
    outgoing = np.exp(1j * (phase + 0.5 * log_t * np.abs(W_plus) ** 2)) * W_plus * symbol_m1(omega_bar, y, xi_star)
    incoming = (np.exp(-1j * (phase + 0.5 * log_t * np.abs(W_minus) ** 2)) * W_minus
                * symbol_m2(omega_bar, y, -xi_star))
    gauge = np.exp(1j * (p_bar - p) * y)
    return ComplexField(grid, gauge * (outgoing - incoming) / np.sqrt(2.0 * t)), clamped


@dataclass
class NormalForm:
    """Samples of the quadratic normal-form correction B(t, xi)."""

    t: np.ndarray
    xi: np.ndarray
    values: np.ndarray

    def sup_weighted(self) -> np.ndarray:
        """sup_xi <xi>^2 |B(t, xi)| at each time."""
        return np.max((1.0 + self.xi[None, :] ** 2) * np.abs(self.values), axis=1)


def normal_form_B(amplitudes: TimeSeries, omega_bar: float, coefficients: QuadraticCoefficients) -> NormalForm:
    """
    B(t, xi) = e^{it(xi^2 - w)} (e^{itw} h1)^2 q1 + e^{it(xi^2 + w)} (e^{itw} h1)(e^{-itw} h2) q2
             + e^{it(xi^2 + 3w)} (e^{-itw} h2)^2 q3.
    """
    t = amplitudes.t[:, None]
    xi = coefficients.xi[None, :]
    filtered_1 = (np.exp(1j * amplitudes.t * omega_bar) * amplitudes["h1"])[:, None]
    filtered_2 = (np.exp(-1j * amplitudes.t * omega_bar) * amplitudes["h2"])[:, None]
    values = (np.exp(1j * t * (xi ** 2 - omega_bar)) * filtered_1 ** 2 * coefficients.q1[None, :]
              + np.exp(1j * t * (xi ** 2 + omega_bar)) * filtered_1 * filtered_2 * coefficients.q2[None, :]
              + np.exp(1j * t * (xi ** 2 + 3 * omega_bar)) * filtered_2 ** 2 * coefficients.q3[None, :])
    return NormalForm(amplitudes.t, coefficients.xi, values)


@dataclass
class DecayReport:
    """Every fit, series and pipeline-level flag of one decay report."""

    fits: List[DecayFit] = field(default_factory=list)
    series: List[TimeSeries] = field(default_factory=list)
    profile: Optional[ScatteringProfile] = None
    spectra_columns: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def fit(self, quantity: str) -> Optional[DecayFit]:
        return next((fit for fit in self.fits if fit.quantity == quantity), None)

    @property
    def passed(self) -> bool:
        return all(fit.passed for fit in self.fits) and all(self.flags.values())

    def summary_rows(self) -> List[Dict[str, object]]:
        rows = [fit.as_row() for fit in self.fits]
        rows.extend({"quantity": name, "slope": float("nan"), "stderr": float("nan"),
                     "predicted": float("nan"), "pass": ok} for name, ok in self.flags.items())
        return rows


def _fit_into(report: DecayReport, series: TimeSeries, column: str, t_min: float, t_max: float,
              quantity: Optional[str] = None) -> None:
    quantity = column if quantity is None else quantity
    try:
        report.fits.append(decay_slope(series, column, t_min, t_max, quantity))
    except (DecayFitError, ValueError) as error:
        logger.warning(f"Skipping decay fit of {quantity}: {error}")
        report.skipped[quantity] = str(error)
        report.flags[f"{quantity}_fit"] = False


def _fit_drift(report: DecayReport, drift: TimeSeries, column: str, t_min: float, t_max: float) -> None:
    """Fit a parameter drift unless it never leaves the roundoff floor on the window."""
    window = drift.window(t_min, t_max)
    floor = TOLERANCES["drift_floor"]
    if window.t.size and np.max(window[column]) < floor:
        message = f"{column} stays below {floor:.0e} on [{t_min:g}, {t_max:g}]; the parameter does not drift"
        logger.info(message)
        report.warnings.append(message)
        report.flags[column] = True
        return
    _fit_into(report, drift, column, t_min, t_max)


def radiation_sup_series(series: ModulationSeries) -> TimeSeries:
    return TimeSeries("u_linf", series.t, {"u_linf": np.array([np.max(np.abs(s.U.first)) for s in series.states])})


def parameter_drift_series(series: ModulationSeries, t_ref: Optional[float] = None) -> TimeSeries:
    """
    Deviations |w(t) - w(t_ref)|, |p(t) - p(t_ref)| and their tail envelopes
    sup_{t <= s <= t_ref} of the deviation, which the drift fits use.

    Args:
        series: Tracked modulation parameters
        t_ref: Reference time, the last frame when None

    Returns:
        TimeSeries with omega_deviation, p_deviation, omega_drift and p_drift
    """
    t = series.t
    ref = len(t) - 1 if t_ref is None else int(np.searchsorted(t, t_ref, side="right")) - 1
    ref = min(max(ref, 0), len(t) - 1)
    columns = {}
    for name in ("omega", "p"):
        values = series.parameter(name)
        deviation = np.abs(values - values[ref])
        envelope = deviation.copy()
        envelope[:ref + 1] = np.maximum.accumulate(deviation[:ref + 1][::-1])[::-1]
        columns[f"{name}_deviation"] = deviation
        columns[f"{name}_drift"] = envelope
    return TimeSeries("parameter_drift", t, columns)


def asymptotic_error_series(series: ModulationSeries, spectra: SpectrumSeries, profile: ScatteringProfile,
                            t_min: float) -> TimeSeries:
    """||u(t) - u_inf(t)||_inf at the spectrum times >= max(t_min, 1), with a clamped flag per time."""
    times, errors, clamped = [], [], []
    for index, (t, frame) in enumerate(zip(spectra.t, spectra.frames)):
        if t < max(t_min, 1.0):
            continue
        state = series.states[frame]
        field_, edge = asymptotic_field(t, state.U.grid, profile, spectra.omega_bar, spectra.p_bar,
                                        spectra.theta1[index], spectra.theta2[index], spectra.p[index])
        times.append(t)
        errors.append(np.max(np.abs(state.U.first - field_.values)))
        clamped.append(float(edge))
    return TimeSeries("asymptotic_error", np.array(times),
                      {"asymptotic_error": np.array(errors), "clamped": np.array(clamped)})


def run_decay_report(series: ModulationSeries, fgrid: FrequencyGrid,
                     stride: int = DEFAULT_EXPERIMENT["frozen"]["spectrum_stride"],
                     t_min: float = DEFAULT_EXPERIMENT["analysis"]["t_min"],
                     t_fit_max: Optional[float] = None,
                     coefficient_grid: Optional[Grid] = None,
                     epsilon: Optional[float] = None) -> DecayReport:
    """
    Produce every decay series and fit of a tracked run.

    Args:
        series: Modulation series of the run, at least three frames
        fgrid: Frequency nodes of the spectra
        stride: Frames between distorted transforms
        t_min: Start of the fit windows
        t_fit_max: End of the fit windows, last fitted time when None
        coefficient_grid: Spatial grid for the quadratic coefficients, the run grid when None
        epsilon: Perturbation size for the W stability band, estimated from V(0) when None

    Returns:
        DecayReport
    """
    report = DecayReport()
    T = float(series.t[-1])
    t_max = T if t_fit_max is None else min(t_fit_max, T)

    spectra, _ = build_spectrum_series(series, fgrid, stride)
    omega_bar = spectra.omega_bar
    report.flags["scattering_relation"] = bool(
        np.max(spectra.scattering_defects()) < TOLERANCES["scattering_relation"] * max(1.0, max(
            S.sup_norm() for S in spectra.transforms)))

    u_linf = radiation_sup_series(series)
    drift = parameter_drift_series(series, t_max)
    amplitudes = amplitudes_h(spectra)
    local = local_decay_series(spectra, amplitudes)
    discrete = discrete_coefficients_series(spectra)
    bound = spectrum_bound_series(spectra)
    report.flags["spectrum_bound"] = bool(np.max(bound.window(1.0, t_max)["growth"], initial=0.0)
                                          <= TOLERANCES["spectrum_growth"])

    coefficients = frakq_coefficients(omega_bar, fgrid.nodes, coefficient_grid or series.states[0].U.grid)
    normal_form = TimeSeries("normal_form_B", amplitudes.t,
                             {"normal_form_B": normal_form_B(amplitudes, omega_bar, coefficients).sup_weighted()})

    _fit_into(report, u_linf, "u_linf", t_min, t_max)
    drift_max = FIT_CONFIG["drift_window_fraction"] * t_max
    _fit_drift(report, drift, "omega_drift", t_min, drift_max)
    _fit_drift(report, drift, "p_drift", t_min, drift_max)
    for column in ("abs_h1", "abs_h2", "h1_filtered_dt", "h2_filtered_dt"):
        _fit_into(report, amplitudes, column, t_min, t_max, column.replace("abs_", ""))
    _fit_into(report, local, "remainder_local", t_min, t_max)
    _fit_into(report, discrete, "discrete_coefficients", t_min, t_max)
    _fit_into(report, normal_form, "normal_form_B", t_min, t_max)

    profile = extract_W(spectra, t_max=t_max, epsilon=epsilon)
    report.profile = profile
    report.flags["w_stability"] = profile.stable
    error = asymptotic_error_series(series, spectra, profile, FIT_CONFIG["asymptotic_t_min"])
    clamped = error.t[error["clamped"] > 0]
    if clamped.size:
        report.warnings.append(f"u_inf clamped to the profile grid at {clamped.size} time(s) "
                               f"up to t={clamped[-1]:g}; widen frozen.xi_max")
    _fit_into(report, error, "asymptotic_error", FIT_CONFIG["asymptotic_t_min"], t_max)

    report.series = [u_linf, drift, amplitudes, local, discrete, bound, normal_form, error]
    for index in sorted({0, len(spectra) // 2, len(spectra) - 1}):
        report.spectra_columns[f"spectrum_t{spectra.t[index]:.6g}"] = spectra.transforms[index].as_columns()
    report.spectra_columns["scattering_profile"] = profile.as_columns()

    for warning in report.warnings:
        logger.warning(warning)
    logger.info(f"Decay report: {sum(fit.passed for fit in report.fits)}/{len(report.fits)} fits in band, "
                f"flags {report.flags}")
    return report

"""
Distorted Fourier transform of the linearized operator H(w).

Generalized eigenfunctions (a = sqrt(w), D(xi) = (|xi| - i a)^2):

    Psi_1(x, xi) = (2 pi)^{-1/2} (xi + i a tanh(a x))^2 / D(xi) e^{i x xi} = (2 pi)^{-1/2} m_1 e^{i x xi}
    Psi_2(x, xi) = (2 pi)^{-1/2} w sech^2(a x) / D(xi) e^{i x xi}          = (2 pi)^{-1/2} m_2 e^{i x xi}
    Psi_+ = (Psi_1, Psi_2),  Psi_- = (Psi_2, Psi_1)

Forward: f_+ = <F, s3 Psi_+>, f_- = <F, s3 Psi_->.  Inverse: P_e F = int f_+ Psi_+ - f_- Psi_- dxi.

Every pairing is rewritten through flat transforms of f, tanh f, sech^2 f and
sech^2 tanh f, so that a transform costs a handful of dense (x, xi) products
evaluated in chunks of xi.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from nlslab.classes.grid_field import Grid, VectorField, trapezoid_weights
from nlslab.config import DEFAULT_EXPERIMENT, RUNTIME_CONFIG, TOLERANCES
from nlslab.logging_helpers import get_logger

logger = get_logger("distorted_ft")

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform nodes on [-xi_max, xi_max] with a node at xi = 0."""

    n_xi: int = DEFAULT_EXPERIMENT["frozen"]["n_xi"]
    xi_max: float = DEFAULT_EXPERIMENT["frozen"]["xi_max"]

    def __post_init__(self):
        if self.n_xi < 3 or self.n_xi % 2 == 0:
            raise ValueError(f"n_xi must be odd and >= 3 to hold xi = 0, got {self.n_xi}")
        if self.xi_max <= 0:
            raise ValueError(f"xi_max must be positive, got {self.xi_max}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.xi_max, self.xi_max, self.n_xi)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.nodes)

    @property
    def spacing(self) -> float:
        return 2.0 * self.xi_max / (self.n_xi - 1)


@dataclass(frozen=True)
class DistortedSpectrum:
    """Sampled pair (f_+, f_-) relative to a frozen omega."""

    omega_bar: float
    fgrid: FrequencyGrid
    f_plus: np.ndarray
    f_minus: np.ndarray
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("f_plus", "f_minus"):
            values = np.array(getattr(self, name), dtype=complex)
            if values.shape != (self.fgrid.n_xi,):
                raise ValueError(f"{name} has {values.shape} samples, expected {self.fgrid.n_xi}")
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{name} holds non-finite samples")
            object.__setattr__(self, name, values)

    def replace(self, f_plus: np.ndarray, f_minus: np.ndarray) -> "DistortedSpectrum":
        return DistortedSpectrum(self.omega_bar, self.fgrid, f_plus, f_minus, self.warnings)

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.f_plus)), np.max(np.abs(self.f_minus))))

    def as_columns(self) -> dict:
        return {
            "xi": self.fgrid.nodes,
            "re_fplus": self.f_plus.real,
            "im_fplus": self.f_plus.imag,
            "re_fminus": self.f_minus.real,
            "im_fminus": self.f_minus.imag,
        }


def symbol_m1(omega: float, x, xi):
    root = np.sqrt(omega)
    return (xi + 1j * root * np.tanh(root * x)) ** 2 / (np.abs(xi) - 1j * root) ** 2


def symbol_m2(omega: float, x, xi):
    root = np.sqrt(omega)
    return omega / np.cosh(root * x) ** 2 / (np.abs(xi) - 1j * root) ** 2


def symbol_m1_dx(omega: float, x, xi):
    root = np.sqrt(omega)
    sech2 = 1.0 / np.cosh(root * x) ** 2
    return 2j * omega * sech2 * (xi + 1j * root * np.tanh(root * x)) / (np.abs(xi) - 1j * root) ** 2


def symbol_m2_dx(omega: float, x, xi):
    root = np.sqrt(omega)
    sech2 = 1.0 / np.cosh(root * x) ** 2
    return -2.0 * omega * root * sech2 * np.tanh(root * x) / (np.abs(xi) - 1j * root) ** 2


def psi_basis(omega: float, x, xi, branch: int):
    """
    Pointwise generalized eigenfunction components Psi_1, Psi_2 (broadcasting).

    Args:
        omega: Scaling parameter
        x: Positions
        xi: Frequencies
        branch: 1 or 2
    """
    if branch == 1:
        symbol = symbol_m1(omega, x, xi)
    elif branch == 2:
        symbol = symbol_m2(omega, x, xi)
    else:
        raise ValueError(f"branch must be 1 or 2, got {branch}")
    return symbol * np.exp(1j * x * xi) / SQRT_2PI


def _chunked_exponential_product(rows: np.ndarray, inner: np.ndarray, outer: np.ndarray,
                                 sign: float) -> np.ndarray:
    """rows[r, i] summed against exp(sign i inner_i outer_o), chunked over outer nodes."""
    rows = np.atleast_2d(rows)
    result = np.empty((rows.shape[0], outer.size), dtype=complex)
    chunk = RUNTIME_CONFIG["xi_chunk"]

    def work(start: int) -> None:
        stop = min(start + chunk, outer.size)
        kernel = np.exp(sign * 1j * np.outer(inner, outer[start:stop]))
        result[:, start:stop] = rows @ kernel

    starts = range(0, outer.size, chunk)
    threads = RUNTIME_CONFIG["threads"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    else:
        for start in starts:
            work(start)
    return result


def flat_transform(rows: np.ndarray, grid: Grid, xi: np.ndarray) -> np.ndarray:
    """(2 pi)^{-1/2} int g(x) e^{-i x xi} dx for each row g, sampled at xi."""
    return _chunked_exponential_product(rows, grid.x, xi, -1.0) * (grid.dx / SQRT_2PI)


def _profiles(omega: float, grid: Grid):
    root = np.sqrt(omega)
    tanh = np.tanh(root * grid.x)
    sech2 = 1.0 / np.cosh(root * grid.x) ** 2
    return root, tanh, sech2


def _boundary_warnings(F: VectorField) -> Tuple[str, ...]:
    edge = ~F.grid.interior_mask(0.95)
    level = max(np.max(np.abs(F.first[edge])), np.max(np.abs(F.second[edge])))
    if level > TOLERANCES["boundary_decay"]:
        message = f"field is {level:.2e} near the boundary; transform integrals are truncated"
        logger.warning(message)
        return (message,)
    return ()


def dft_forward_at(F: VectorField, omega_bar: float, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(f_+, f_-) of F at arbitrary frequencies xi."""
    root, tanh, sech2 = _profiles(omega_bar, F.grid)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    rows = np.vstack([F.first, tanh * F.first, sech2 * F.first,
                      F.second, tanh * F.second, sech2 * F.second])
    a1, t1, s1, a2, t2, s2 = flat_transform(rows, F.grid, xi)
    denominator = (np.abs(xi) + 1j * root) ** 2
    # tanh^2 = 1 - sech^2
    f_plus = (xi ** 2 * a1 - 2j * root * xi * t1 - omega_bar * (a1 - s1) - omega_bar * s2) / denominator
    f_minus = (omega_bar * s1 - xi ** 2 * a2 + 2j * root * xi * t2 + omega_bar * (a2 - s2)) / denominator
    return f_plus, f_minus


def dft_forward(F: VectorField, omega_bar: float, fgrid: FrequencyGrid) -> DistortedSpectrum:
    """
    Distorted Fourier transform f_+- = <F, s3 Psi_+->.

    Args:
        F: Vector field, expected to decay near the box boundary
        omega_bar: Frozen scaling parameter
        fgrid: Frequency nodes

    Returns:
        DistortedSpectrum, carrying a warning when the boundary-decay check fails
    """
    f_plus, f_minus = dft_forward_at(F, omega_bar, fgrid.nodes)
    return DistortedSpectrum(omega_bar, fgrid, f_plus, f_minus, _boundary_warnings(F))


def dft_inverse(S: DistortedSpectrum, grid: Grid) -> VectorField:
    """
    Synthesis P_e F = int f_+ Psi_+ dxi - int f_- Psi_- dxi by xi-trapezoid.

    Args:
        S: Spectrum, expected to decay at +-xi_max
        grid: Spatial grid of the result

    Returns:
        Vector field P_e F sampled on grid
    """
    peak = max(S.sup_norm(), np.finfo(float).tiny)
    edge = max(abs(S.f_plus[0]), abs(S.f_plus[-1]), abs(S.f_minus[0]), abs(S.f_minus[-1]))
    if S.sup_norm() > 0 and edge / peak > TOLERANCES["spectrum_edge_decay"]:
        logger.warning(f"spectrum edge is {edge / peak:.2e} of its peak; inverse is truncated")

    omega = S.omega_bar
    root, tanh, sech2 = _profiles(omega, grid)
    xi = S.fgrid.nodes
    weights = S.fgrid.weights / (np.abs(xi) - 1j * root) ** 2
    plus = S.f_plus * weights
    minus = S.f_minus * weights
    rows = np.vstack([xi ** 2 * plus, xi * plus, plus, xi ** 2 * minus, xi * minus, minus])
    p2, p1, p0, n2, n1, n0 = _chunked_exponential_product(rows, xi, grid.x, 1.0) / SQRT_2PI

    tanh2 = tanh ** 2
    first = p2 + 2j * root * tanh * p1 - omega * tanh2 * p0 - omega * sech2 * n0
    second = omega * sech2 * p0 - n2 - 2j * root * tanh * n1 + omega * tanh2 * n0
    return VectorField(grid, first, second)


def propagate_spectrum(S: DistortedSpectrum, t: float) -> DistortedSpectrum:
    """Spectral side of e^{itH}: f_+ e^{it(xi^2+w)}, f_- e^{-it(xi^2+w)}."""
    phase = np.exp(1j * t * (S.fgrid.nodes ** 2 + S.omega_bar))
    return S.replace(S.f_plus * phase, S.f_minus * np.conj(phase))


def correction_L(V: VectorField, omega: float, fgrid: FrequencyGrid, sign: int) -> np.ndarray:
    """
    L_+[F] = 2 <f_2, Psi_2> and L_-[F] = 2 <f_1, Psi_2>, so that
    F_+[s3 F] = F_+[F] + L_+[F] and F_-[s3 F] = -F_-[F] + L_-[F].
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    root, _, sech2 = _profiles(omega, V.grid)
    xi = fgrid.nodes
    slot = V.second if sign == 1 else V.first
    (transformed,) = flat_transform(sech2 * slot, V.grid, xi)
    return 2.0 * omega * transformed / (np.abs(xi) + 1j * root) ** 2


def correction_K(V: VectorField, omega: float, fgrid: FrequencyGrid, sign: int) -> np.ndarray:
    """
    Commutator of the transform with d/dx: F_+-[dF/dx] = i xi F_+-[F] + K_+-[F], where

        K_+[F] = -(2 pi)^{-1/2} (<f_1, e^{ix xi} d_x m_1> - <f_2, e^{ix xi} d_x m_2>)
        K_-[F] = -(2 pi)^{-1/2} (<f_1, e^{ix xi} d_x m_2> - <f_2, e^{ix xi} d_x m_1>)
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    root, tanh, sech2 = _profiles(omega, V.grid)
    xi = fgrid.nodes
    rows = np.vstack([sech2 * V.first, sech2 * tanh * V.first,
                      sech2 * V.second, sech2 * tanh * V.second])
    s1, st1, s2, st2 = flat_transform(rows, V.grid, xi)
    scale = 2.0 * omega / (np.abs(xi) + 1j * root) ** 2
    if sign == 1:
        return scale * (1j * xi * s1 + root * st1 - root * st2)
    return scale * (root * st1 - 1j * xi * s2 - root * st2)


def scattering_relation_defect(S: DistortedSpectrum) -> float:
    """
    Max defect of f_-(xi) = -((|xi| - i a)^2 / (|xi| + i a)^2) conj(f_+(-xi)),
    which holds for every J-invariant field.
    """
    xi = S.fgrid.nodes
    root = np.sqrt(S.omega_bar)
    ratio = (np.abs(xi) - 1j * root) ** 2 / (np.abs(xi) + 1j * root) ** 2
    predicted = -ratio * np.conj(S.f_plus[::-1])
    return float(np.max(np.abs(S.f_minus - predicted)))


def representation_pairing(S_F: DistortedSpectrum, S_G: DistortedSpectrum, t: float = 0.0) -> complex:
    """
    <e^{itH} P_e F, s3 G> from spectra alone:
    int e^{it(xi^2+w)} f_+ conj(g_+) - e^{-it(xi^2+w)} f_- conj(g_-) dxi.
    """
    if S_F.fgrid != S_G.fgrid or S_F.omega_bar != S_G.omega_bar:
        raise ValueError("spectra must share omega_bar and frequency grid")
    evolved = propagate_spectrum(S_F, t)
    integrand = evolved.f_plus * np.conj(S_G.f_plus) - evolved.f_minus * np.conj(S_G.f_minus)
    return complex(np.sum(integrand * S_F.fgrid.weights))


def sample_spectrum(S: DistortedSpectrum, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Linear interpolation of (f_+, f_-) at arbitrary xi; zero outside the grid."""
    nodes = S.fgrid.nodes

    def interp(values: np.ndarray) -> np.ndarray:
        return (np.interp(xi, nodes, values.real, left=0.0, right=0.0)
                + 1j * np.interp(xi, nodes, values.imag, left=0.0, right=0.0))

    return interp(S.f_plus), interp(S.f_minus)


def stationary_phase_field(S: DistortedSpectrum, t: float, grid: Grid) -> VectorField:
    """
    Leading large-t term of e^{-itH} P_e F for a field with spectrum S:

        int e^{-+it xi^2} e^{iy xi} m g dxi ~ sqrt(pi/t) e^{+-iy^2/4t} e^{-+i pi/4} m(y, +-y/2t) g(+-y/2t)
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    omega = S.omega_bar
    y = grid.x
    xi_star = y / (2.0 * t)
    f_plus, _ = sample_spectrum(S, xi_star)
    _, f_minus = sample_spectrum(S, -xi_star)
    outgoing = np.exp(-1j * t * omega + 1j * y ** 2 / (4.0 * t) - 0.25j * np.pi) * f_plus
    incoming = np.exp(1j * t * omega - 1j * y ** 2 / (4.0 * t) + 0.25j * np.pi) * f_minus
    scale = 1.0 / np.sqrt(2.0 * t)
    first = scale * (outgoing * symbol_m1(omega, y, xi_star) - incoming * symbol_m2(omega, y, -xi_star))
    second = scale * (outgoing * symbol_m2(omega, y, xi_star) - incoming * symbol_m1(omega, y, -xi_star))
    return VectorField(grid, first, second)

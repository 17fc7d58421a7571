"""
Closed-form versus quadrature checks of the explicit spectral distributions,
symbols and source transforms attached to the distorted Fourier basis.

Every check returns an IdentityReport.  Relative errors are taken where the
closed form is not negligible; near its zeros only the absolute error counts.
"""

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from nlslab.classes.grid_field import Grid
from nlslab.classes.soliton import phi, phi_dx
from nlslab.config import IDENTITY_GRID, TOLERANCES
from nlslab.logging_helpers import get_logger
from nlslab.transform.distorted_ft import dft_forward_at, psi_basis
from nlslab.transform.modulation import source_terms

logger = get_logger("spectral_identities")

REPORT_SCHEMA = ("name", "lattice_size", "max_rel_err", "max_abs_err", "pass")


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of one identity check over a sample lattice."""

    name: str
    lattice_size: int
    max_rel_err: float
    max_abs_err: float
    passed: bool

    def __post_init__(self):
        if self.max_rel_err < 0 or self.max_abs_err < 0:
            raise ValueError(f"errors must be nonnegative in report '{self.name}'")

    def as_row(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "lattice_size": self.lattice_size,
            "max_rel_err": self.max_rel_err,
            "max_abs_err": self.max_abs_err,
            "pass": self.passed,
        }

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: rel {self.max_rel_err:.2e}, abs {self.max_abs_err:.2e} "
                f"on {self.lattice_size} samples")


def compare(name: str, closed: np.ndarray, computed: np.ndarray,
            rel_tol: float = TOLERANCES["identity_rel"], abs_tol: float = TOLERANCES["identity_abs"],
            exclude: Optional[np.ndarray] = None) -> IdentityReport:
    """
    Build a report from two evaluations of the same quantity.

    Args:
        name: Identity name
        closed: Reference values
        computed: Values under test
        rel_tol: Bound on the relative error where |closed| > abs_tol
        abs_tol: Bound on the absolute error elsewhere
        exclude: Mask of samples compared in absolute error only

    Returns:
        IdentityReport
    """
    closed = np.atleast_1d(np.asarray(closed))
    computed = np.atleast_1d(np.asarray(computed))
    error = np.abs(closed - computed)
    scale = np.abs(closed)
    relative = scale > abs_tol
    if exclude is not None:
        relative &= ~np.asarray(exclude)
    max_rel = float(np.max(error[relative] / scale[relative])) if relative.any() else 0.0
    absolute_only = float(np.max(error[~relative])) if (~relative).any() else 0.0
    passed = bool(max_rel < rel_tol and absolute_only < abs_tol)
    report = IdentityReport(name, int(closed.size), max_rel, float(np.max(error)), passed)
    logger.debug(str(report))
    return report


def kappa_omega(omega: float, s: np.ndarray) -> np.ndarray:
    """(s / sqrt w) cosech(pi s / (2 sqrt w)), equal to 2/pi at s = 0."""
    z = np.asarray(s, dtype=float) / np.sqrt(omega)
    safe = np.where(z == 0.0, 1.0, z)
    return np.where(z == 0.0, 2.0 / np.pi, safe / np.sinh(0.5 * np.pi * safe))


def resonance_band(omega: float, xi: np.ndarray) -> np.ndarray:
    root = np.sqrt(omega)
    return np.minimum(np.abs(xi - root), np.abs(xi + root)) < TOLERANCES["resonance_band"]


# ---------------------------------------------------------------------------
# Source transform of Q1 and the quadratic coefficients
# ---------------------------------------------------------------------------

def q1_transform_closed(omega: float, xi: np.ndarray) -> np.ndarray:
    """(w - xi^2) xi^2 (w + xi^2) sech(pi xi / (2 sqrt w)) / (24 sqrt(pi) w^2 (|xi| + i sqrt w)^2)."""
    xi = np.asarray(xi, dtype=float)
    return (xi ** 2 - omega) * _q1_reduced(omega, xi)


def _q1_reduced(omega: float, xi: np.ndarray) -> np.ndarray:
    root = np.sqrt(omega)
    return (-xi ** 2 * (omega + xi ** 2) / (24.0 * np.sqrt(np.pi) * omega ** 2 * (np.abs(xi) + 1j * root) ** 2)
            / np.cosh(0.5 * np.pi * xi / root))


def q1_null_structure(omega: float, xi_samples: np.ndarray, grid: Optional[Grid] = None) -> IdentityReport:
    """
    Closed form of F_+[Q1] against the transform of the sampled source.

    Args:
        omega: Scaling parameter
        xi_samples: Frequencies
        grid: Quadrature grid, IDENTITY_GRID resolution when None
    """
    grid = grid or identity_grid()
    xi = np.asarray(xi_samples, dtype=float)
    Q1, _, _ = source_terms(omega, grid)
    computed, _ = dft_forward_at(Q1, omega, xi)
    return compare("q1_null_structure", q1_transform_closed(omega, xi), computed,
                   exclude=resonance_band(omega, xi))


class QuadraticCoefficients(NamedTuple):
    xi: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    q3: np.ndarray


def frakq_coefficients(omega: float, xi_samples: np.ndarray, grid: Optional[Grid] = None) -> QuadraticCoefficients:
    """
    q1 = F_+[Q1] / (xi^2 - w) from the closed form (its zero at xi^2 = w cancels exactly),
    q2 = F_+[Q2] / (xi^2 + w) and q3 = F_+[Q3] / (xi^2 + 3w) by quadrature.
    """
    grid = grid or identity_grid()
    xi = np.asarray(xi_samples, dtype=float)
    _, Q2, Q3 = source_terms(omega, grid)
    transform_2, _ = dft_forward_at(Q2, omega, xi)
    transform_3, _ = dft_forward_at(Q3, omega, xi)
    return QuadraticCoefficients(
        xi=xi,
        q1=_q1_reduced(omega, xi),
        q2=transform_2 / (xi ** 2 + omega),
        q3=transform_3 / (xi ** 2 + 3.0 * omega),
    )


# ---------------------------------------------------------------------------
# kappa_{m,n}
# ---------------------------------------------------------------------------

def kappa_mn(m: int, n: int, zeta: float) -> complex:
    """
    int e^{i y zeta} sech^m(y) tanh^n(y) dy by oscillatory quadrature on [0, inf).

    Args:
        m: Power of sech, at least 1
        n: Power of tanh
        zeta: Frequency
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    def integrand(y: float) -> float:
        decay = np.exp(-2.0 * y)
        return (2.0 * np.exp(-y) / (1.0 + decay)) ** m * ((1.0 - decay) / (1.0 + decay)) ** n

    if n % 2 == 0:
        if zeta == 0.0:
            value, _ = quad(integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12)
        else:
            value, _ = quad(integrand, 0.0, np.inf, weight="cos", wvar=abs(zeta))
        return complex(2.0 * value)
    if zeta == 0.0:
        return 0j
    value, _ = quad(integrand, 0.0, np.inf, weight="sin", wvar=abs(zeta))
    return complex(2j * np.sign(zeta) * value)


def kappa_closed_2_0(zeta: np.ndarray) -> np.ndarray:
    """kappa_{2,0}(zeta) = pi zeta / sinh(pi zeta / 2), i.e. pi kappa_1(zeta)."""
    return np.pi * kappa_omega(1.0, zeta)


KAPPA_RATIOS = {
    (2, 1): lambda z: 0.5j * z,
    (4, 0): lambda z: (4.0 + z ** 2) / 6.0,
    (4, 1): lambda z: 1j * z * (4.0 + z ** 2) / 24.0,
    (6, 0): lambda z: (4.0 + z ** 2) * (16.0 + z ** 2) / 120.0,
    (6, 1): lambda z: 1j * z * (4.0 + z ** 2) * (16.0 + z ** 2) / 720.0,
}


def kappa_reports(zetas: Sequence[float] = IDENTITY_GRID["kappa_zetas"]) -> List[IdentityReport]:
    """kappa_{2,0} closed form and the five ratios kappa_{m,n} / kappa_{2,0}."""
    zetas = np.asarray(zetas, dtype=float)
    base = np.array([kappa_mn(2, 0, z) for z in zetas])
    reports = [compare("kappa_2_0", kappa_closed_2_0(zetas), base, rel_tol=TOLERANCES["kappa_rel"])]
    for (m, n), ratio in KAPPA_RATIOS.items():
        computed = np.array([kappa_mn(m, n, z) for z in zetas])
        reports.append(compare(f"kappa_{m}_{n}", ratio(zetas) * base, computed,
                               rel_tol=TOLERANCES["kappa_rel"]))
    return reports


# ---------------------------------------------------------------------------
# Quadratic spectral distributions nu and lambda
# ---------------------------------------------------------------------------

def pair_lattice(pair_range: Tuple[float, float] = IDENTITY_GRID["pair_range"],
                 pair_count: int = IDENTITY_GRID["pair_count"]) -> Tuple[np.ndarray, np.ndarray]:
    axis = np.linspace(*pair_range, pair_count)
    xi1, xi2 = np.meshgrid(axis, axis, indexing="ij")
    return xi1.ravel(), xi2.ravel()


def _basis_rows(omega: float, grid: Grid, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = grid.x[None, :]
    column = np.asarray(xi, dtype=float)[:, None]
    return psi_basis(omega, x, column, 1), psi_basis(omega, x, column, 2)


def _pairing(left: np.ndarray, right: np.ndarray, weight: np.ndarray, dx: float) -> np.ndarray:
    return np.sum(left * right * weight[None, :], axis=1) * dx


def _denominators(omega: float, xi1: np.ndarray, xi2: np.ndarray) -> np.ndarray:
    root = np.sqrt(omega)
    return (np.abs(xi1) - 1j * root) ** 2 * (np.abs(xi2) - 1j * root) ** 2


def nu_closed(omega: float, xi1: np.ndarray, xi2: np.ndarray) -> Dict[str, np.ndarray]:
    root = np.sqrt(omega)
    common = root / 12.0 * kappa_omega(omega, xi1 + xi2) / _denominators(omega, xi1, xi2)
    plus_plus = (xi1 ** 2 + xi2 ** 2 + 2 * omega) * (xi1 ** 2 - 4 * xi1 * xi2 + xi2 ** 2 - 2 * omega) * common
    plus_minus = (xi1 ** 2 - xi2 ** 2) * (xi1 ** 2 + 2 * xi1 * xi2 + xi2 ** 2 + 4 * omega) * common
    return {"++": plus_plus, "+-": plus_minus, "--": -plus_plus}


def nu_quadrature(omega: float, xi1: np.ndarray, xi2: np.ndarray, grid: Grid) -> Dict[str, np.ndarray]:
    """Bilinear Psi pairings against phi_w^2."""
    a1, a2 = _basis_rows(omega, grid, xi1)
    b1, b2 = _basis_rows(omega, grid, xi2)
    weight = phi(omega, grid.x) ** 2
    dx = grid.dx
    return {
        "++": _pairing(a1, b1, weight, dx) - _pairing(a2, b2, weight, dx),
        "+-": _pairing(a1, b2, weight, dx) - _pairing(a2, b1, weight, dx),
        "--": _pairing(a2, b2, weight, dx) - _pairing(a1, b1, weight, dx),
    }


def nu_distributions(omega: float, xi1: np.ndarray, xi2: np.ndarray,
                     grid: Optional[Grid] = None) -> List[IdentityReport]:
    grid = grid or identity_grid()
    closed = nu_closed(omega, xi1, xi2)
    computed = nu_quadrature(omega, xi1, xi2, grid)
    return [compare(f"nu{sign}", closed[sign], computed[sign]) for sign in ("++", "+-", "--")]


def lambda_closed(omega: float, xi1: np.ndarray, xi2: np.ndarray) -> Dict[str, np.ndarray]:
    root = np.sqrt(omega)
    total = xi1 + xi2
    common = (-1j * root * (xi1 ** 2 - xi1 * xi2 + xi2 ** 2 + omega) * kappa_omega(omega, total)
              / _denominators(omega, xi1, xi2))
    plus_plus = (xi1 ** 2 + xi2 ** 2 + 2 * omega) * total * common / 12.0
    plus_minus = (xi1 ** 2 - xi2 ** 2) * (xi1 - xi2) * common / 6.0
    return {"++": plus_plus, "+-": plus_minus, "--": plus_plus}


def lambda_quadrature(omega: float, xi1: np.ndarray, xi2: np.ndarray, grid: Grid) -> Dict[str, np.ndarray]:
    """Bilinear Psi pairings against phi_w phi_w'."""
    a1, a2 = _basis_rows(omega, grid, xi1)
    b1, b2 = _basis_rows(omega, grid, xi2)
    weight = phi(omega, grid.x) * phi_dx(omega, grid.x)
    dx = grid.dx
    plus_plus = (_pairing(a1, b1, weight, dx) + 2 * _pairing(a1, b2, weight, dx)
                 + 2 * _pairing(a2, b1, weight, dx) + _pairing(a2, b2, weight, dx))
    plus_minus = (_pairing(a1, b2, weight, dx) + 2 * _pairing(a1, b1, weight, dx)
                  + 2 * _pairing(a2, b2, weight, dx) + _pairing(a2, b1, weight, dx))
    return {"++": plus_plus, "+-": plus_minus, "--": plus_plus}


def lambda_distributions(omega: float, xi1: np.ndarray, xi2: np.ndarray,
                         grid: Optional[Grid] = None) -> List[IdentityReport]:
    grid = grid or identity_grid()
    closed = lambda_closed(omega, xi1, xi2)
    computed = lambda_quadrature(omega, xi1, xi2, grid)
    return [compare(f"lambda{sign}", closed[sign], computed[sign]) for sign in ("++", "+-", "--")]


# ---------------------------------------------------------------------------
# Cubic symbols
# ---------------------------------------------------------------------------

def cubic_symbols(xi, xi1, xi2, xi3) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    p  = (|xi|+i)^2 (|xi1|-i)^2 (|xi2|+i)^2 (|xi3|-i)^2 and the polynomials p1, p2
    in a = xi^2 - 1, b = xi per slot.
    """
    xi, xi1, xi2, xi3 = (np.asarray(v, dtype=float) for v in (xi, xi1, xi2, xi3))
    symbol = ((np.abs(xi) + 1j) ** 2 * (np.abs(xi1) - 1j) ** 2
              * (np.abs(xi2) + 1j) ** 2 * (np.abs(xi3) - 1j) ** 2)
    a0, a1, a2, a3 = (v ** 2 - 1 for v in (xi, xi1, xi2, xi3))
    b0, b1, b2, b3 = xi, xi1, xi2, xi3
    p1 = (a0 * a1 * a2 * a3 + 16 * b0 * b1 * b2 * b3
          + 4 * (b0 * b1 * a2 * a3 - b0 * a1 * b2 * a3 + b0 * a1 * a2 * b3
                 + a0 * b1 * b2 * a3 - a0 * b1 * a2 * b3 + a0 * a1 * b2 * b3))
    p2 = (2 * (a0 * b1 * a2 * a3 - a0 * a1 * b2 * a3 + a0 * a1 * a2 * b3 - b0 * a1 * a2 * a3)
          + 8 * (a0 * b1 * b2 * b3 - b0 * a1 * b2 * b3 + b0 * b1 * a2 * b3 - b0 * b1 * b2 * a3))
    return symbol, p1, p2


def cubic_symbol_reports(samples: int = 64, seed: int = 0) -> List[IdentityReport]:
    """
    Diagonal property p1/p = 1, p2/p = 0 and the tensor structure
    p1 - i p2 = (xi+i)^2 (xi1-i)^2 (xi2+i)^2 (xi3-i)^2 at random points.
    """
    rng = np.random.default_rng(seed)
    diagonal = rng.uniform(-5.0, 5.0, samples)
    symbol, p1, p2 = cubic_symbols(diagonal, diagonal, diagonal, diagonal)
    tolerance = TOLERANCES["symbol"]
    reports = [
        compare("cubic_diagonal_p1", np.ones(samples), p1 / symbol, rel_tol=tolerance, abs_tol=tolerance),
        compare("cubic_diagonal_p2", np.zeros(samples), p2 / symbol, rel_tol=tolerance, abs_tol=tolerance),
    ]
    xi, xi1, xi2, xi3 = rng.uniform(-5.0, 5.0, (4, samples))
    _, p1, p2 = cubic_symbols(xi, xi1, xi2, xi3)
    product = (xi + 1j) ** 2 * (xi1 - 1j) ** 2 * (xi2 + 1j) ** 2 * (xi3 - 1j) ** 2
    reports.append(compare("cubic_tensor_structure", product, p1 - 1j * p2, rel_tol=tolerance, abs_tol=tolerance))
    return reports


# ---------------------------------------------------------------------------
# Fourier convention self-test
# ---------------------------------------------------------------------------

def tanh_transform(xi: float) -> complex:
    """
    (2 pi)^{-1/2} int tanh(x) e^{-i x xi} dx as a principal value, by splitting
    tanh = sign + (tanh - sign) and using the Abel value int_0^inf sin(x xi) dx = 1/xi.
    """
    if xi == 0.0:
        return 0j
    tail, _ = quad(lambda x: np.tanh(x) - 1.0, 0.0, np.inf, weight="sin", wvar=abs(xi))
    return complex(-2j * np.sign(xi) * (1.0 / abs(xi) + tail) / np.sqrt(2.0 * np.pi))


def tanh_transform_check(xi_samples: Sequence[float] = (1.0, 2.0)) -> IdentityReport:
    """FT[tanh] against -i sqrt(pi/2) p.v. cosech(pi xi / 2)."""
    xi = np.asarray(xi_samples, dtype=float)
    closed = -1j * np.sqrt(0.5 * np.pi) / np.sinh(0.5 * np.pi * xi)
    computed = np.array([tanh_transform(v) for v in xi])
    return compare("tanh_transform", closed, computed, rel_tol=TOLERANCES["tanh_transform"])


def identity_grid() -> Grid:
    return Grid(IDENTITY_GRID["n_points"], IDENTITY_GRID["half_width"])


def identity_suite(omega: float = IDENTITY_GRID["omega"], seed: int = 0) -> List[IdentityReport]:
    """
    Run every identity check at the IDENTITY_GRID resolution.

    Args:
        omega: Scaling parameter
        seed: Seed of the random cubic-symbol samples

    Returns:
        One IdentityReport per identity
    """
    grid = identity_grid()
    xi = np.linspace(*IDENTITY_GRID["xi_range"], IDENTITY_GRID["xi_count"])
    xi1, xi2 = pair_lattice()

    reports = [q1_null_structure(omega, xi, grid)]
    reports.extend(kappa_reports())
    reports.extend(nu_distributions(omega, xi1, xi2, grid))
    reports.extend(lambda_distributions(omega, xi1, xi2, grid))
    reports.extend(cubic_symbol_reports(seed=seed))
    reports.append(tanh_transform_check())

    failed = [report.name for report in reports if not report.passed]
    if failed:
        logger.warning(f"{len(failed)} of {len(reports)} identities failed: {', '.join(failed)}")
    else:
        logger.info(f"All {len(reports)} identities passed at omega={omega}")
    return reports

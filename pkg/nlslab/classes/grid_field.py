"""
Spatial grid, field containers and the FFT contract.

The line is truncated to the periodic box [-L, L) with n equispaced nodes.
Forward transforms are unnormalized (scipy.fft.fft), so Parseval reads

    sum |f_j|^2 dx = (dx / n) sum |fft(f)_k|^2 = (2L / n^2) sum |fft(f)_k|^2.

All integrals are periodic trapezoid sums, i.e. sum(values) * dx.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from nlslab.config import RUNTIME_CONFIG, is_power_of_two
from nlslab.errors import GridMismatchError


@dataclass(frozen=True)
class Grid:
    """Periodic grid on [-L, L) and its dual FFT frequencies."""

    n_points: int
    half_width: float

    def __post_init__(self):
        if self.n_points < 16 or not is_power_of_two(self.n_points):
            raise ValueError(f"n_points must be a power of two >= 16, got {self.n_points}")
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n_points, d=self.dx)

    def interior_mask(self, fraction: float) -> np.ndarray:
        """Boolean mask of nodes with |x| < fraction * L."""
        return np.abs(self.x) < fraction * self.half_width

    def fft(self, values: np.ndarray) -> np.ndarray:
        return sfft.fft(values, workers=RUNTIME_CONFIG["threads"])

    def ifft(self, values: np.ndarray) -> np.ndarray:
        return sfft.ifft(values, workers=RUNTIME_CONFIG["threads"])


@dataclass(frozen=True)
class ComplexField:
    """One sampled complex function f(x_j)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"field has {values.shape} samples, grid has {self.grid.n_points}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ComplexField":
        return cls(grid, np.zeros(grid.n_points, dtype=complex))

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.values))

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _require_same_grid(self.grid, other.grid)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        _require_same_grid(self.grid, other.grid)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "ComplexField":
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class VectorField:
    """A C^2-valued pair (first, second) on a shared grid."""

    grid: Grid
    first: np.ndarray
    second: np.ndarray
    j_invariant: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("first", "second"):
            values = np.array(getattr(self, name), dtype=complex)
            if values.shape != (self.grid.n_points,):
                raise ValueError(f"{name} slot has {values.shape} samples")
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @classmethod
    def from_scalar(cls, f: ComplexField) -> "VectorField":
        """J-invariant pair (f, conj f)."""
        return cls(f.grid, f.values, np.conj(f.values), j_invariant=True)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        zero = np.zeros(grid.n_points, dtype=complex)
        return cls(grid, zero, zero, j_invariant=True)

    def slots(self):
        return ComplexField(self.grid, self.first), ComplexField(self.grid, self.second)

    def __add__(self, other: "VectorField") -> "VectorField":
        _require_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.first + other.first, self.second + other.second,
                           j_invariant=self.j_invariant and other.j_invariant)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _require_same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.first - other.first, self.second - other.second,
                           j_invariant=self.j_invariant and other.j_invariant)

    def __mul__(self, scalar) -> "VectorField":
        # real scalars keep J-invariance
        keeps = self.j_invariant and np.isrealobj(scalar)
        return VectorField(self.grid, self.first * scalar, self.second * scalar, j_invariant=keeps)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.first)), np.max(np.abs(self.second))))


def _require_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def inner_product_scalar(f: ComplexField, g: ComplexField) -> complex:
    """
    Periodic trapezoid approximation of <f, g> = int f conj(g) dx.

    Args:
        f: Left operand
        g: Right operand (conjugated)

    Returns:
        Complex value of the pairing

    Raises:
        GridMismatchError: if the operands live on different grids
    """
    _require_same_grid(f.grid, g.grid)
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.dx)


def inner_product_vector(U: VectorField, V: VectorField) -> complex:
    """Vector pairing u1 conj(v1) + u2 conj(v2), integrated."""
    _require_same_grid(U.grid, V.grid)
    total = np.sum(U.first * np.conj(V.first) + U.second * np.conj(V.second))
    return complex(total * U.grid.dx)


def spectral_derivative(f: ComplexField, order: int = 1) -> ComplexField:
    """
    Differentiate a periodic field by multiplying its FFT with (ik)^order.

    Args:
        f: Field to differentiate
        order: 1 or 2

    Returns:
        Derivative field on the same grid
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    grid = f.grid
    multiplier = (1j * grid.k) ** order
    if order == 1 and grid.n_points % 2 == 0:
        # Nyquist mode has no odd-derivative partner
        multiplier[grid.n_points // 2] = 0.0
    return ComplexField(grid, grid.ifft(grid.fft(f.values) * multiplier))


def spectral_derivative_vector(U: VectorField, order: int = 1) -> VectorField:
    first, second = U.slots()
    return VectorField(U.grid, spectral_derivative(first, order).values,
                       spectral_derivative(second, order).values, j_invariant=U.j_invariant)


def fourier_shift(f: ComplexField, shift: float) -> ComplexField:
    """Sample f(x + shift) by Fourier interpolation (exact on the periodic grid)."""
    grid = f.grid
    phase = np.exp(1j * grid.k * shift)
    if grid.n_points % 2 == 0:
        phase[grid.n_points // 2] = np.cos(grid.k[grid.n_points // 2] * shift)
    return ComplexField(grid, grid.ifft(grid.fft(f.values) * phase))


def check_J_invariance(U: VectorField) -> float:
    """Max pointwise defect |second(x_j) - conj(first(x_j))|."""
    return float(np.max(np.abs(U.second - np.conj(U.first))))


def parseval_sum(f: ComplexField) -> float:
    """Frequency-side value of int |f|^2 under the unnormalized FFT contract."""
    grid = f.grid
    return float(2.0 * grid.half_width / grid.n_points ** 2 * np.sum(np.abs(grid.fft(f.values)) ** 2))


def h1_norm(f: ComplexField) -> float:
    df = spectral_derivative(f, 1)
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2 + np.abs(df.values) ** 2) * f.grid.dx))


def vector_h1_norm(U: VectorField) -> float:
    first, second = U.slots()
    return float(np.hypot(h1_norm(first), h1_norm(second)))


def pauli_1(U: VectorField) -> VectorField:
    return VectorField(U.grid, U.second, U.first, j_invariant=U.j_invariant)


def pauli_2(U: VectorField) -> VectorField:
    return VectorField(U.grid, -1j * U.second, 1j * U.first)


def pauli_3(U: VectorField) -> VectorField:
    return VectorField(U.grid, U.first, -U.second)


def multiply(U: VectorField, weight: np.ndarray) -> VectorField:
    """Pointwise multiplication of both slots by a sampled weight."""
    weight = np.asarray(weight)
    keeps = U.j_invariant and np.isrealobj(weight)
    return VectorField(U.grid, U.first * weight, U.second * weight, j_invariant=keeps)


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Uniform trapezoid weights for an equispaced node set."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size < 2:
        return np.zeros_like(nodes)
    step = nodes[1] - nodes[0]
    weights = np.full(nodes.size, step)
    weights[0] = weights[-1] = 0.5 * step
    return weights


"""
Linearized operator H(w) around the ground state, its generalized kernel,
threshold resonances and the discrete/essential spectral projections.

    H(w) = [ -d^2 + w - 2 phi^2      -phi^2         ]
           [  phi^2                   d^2 - w + 2 phi^2 ]

Generalized kernel: H Y1 = 0, H Y2 = i Y1, H Y3 = 0, H Y4 = -2i Y3.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from nlslab.classes.grid_field import (
    Grid,
    VectorField,
    inner_product_vector,
    pauli_1,
    pauli_2,
    spectral_derivative_vector,
)
from nlslab.classes.soliton import phi, phi_domega, phi_domega2, phi_dx, phi_dx_domega
from nlslab.config import TOLERANCES
from nlslab.errors import NumericalFailure

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class LinearizedOperator:
    omega: float
    grid: Grid

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    def potential(self) -> np.ndarray:
        return phi(self.omega, self.grid.x) ** 2


@dataclass(frozen=True)
class DiscreteCoefficients:
    """Amplitudes of Y1..Y4 in P_d U."""

    d1: complex
    d2: complex
    d3: complex
    d4: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3, self.d4], dtype=complex)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.as_array())))


def apply_H(op: LinearizedOperator, U: VectorField) -> VectorField:
    """
    Apply H(w) with spectral second derivatives.

    Args:
        op: Operator holding omega and the grid
        U: Vector field on op.grid

    Returns:
        H(w) U
    """
    if U.grid != op.grid:
        raise ValueError("operator and field live on different grids")
    potential = op.potential()
    second_derivative = spectral_derivative_vector(U, 2)
    first = -second_derivative.first + op.omega * U.first - 2 * potential * U.first - potential * U.second
    second = second_derivative.second - op.omega * U.second + potential * U.first + 2 * potential * U.second
    return VectorField(U.grid, first, second)


def eigenfunction_Y(omega: float, j: int, grid: Grid) -> VectorField:
    """
    Generalized eigenfunctions of H(w).

    Y1=(i phi, -i phi), Y2=(d_w phi, d_w phi), Y3=(phi', phi'), Y4=(i x phi, -i x phi).
    """
    x = grid.x
    if j == 1:
        g = 1j * phi(omega, x)
        return VectorField(grid, g, -g, j_invariant=True)
    if j == 2:
        g = phi_domega(omega, x)
        return VectorField(grid, g, g, j_invariant=True)
    if j == 3:
        g = phi_dx(omega, x)
        return VectorField(grid, g, g, j_invariant=True)
    if j == 4:
        g = 1j * x * phi(omega, x)
        return VectorField(grid, g, -g, j_invariant=True)
    raise ValueError(f"j must be in 1..4, got {j}")


def eigenfunction_Y_domega(omega: float, j: int, grid: Grid) -> VectorField:
    """Closed-form omega-derivative of Y_j."""
    x = grid.x
    if j == 1:
        g = 1j * phi_domega(omega, x)
        return VectorField(grid, g, -g, j_invariant=True)
    if j == 2:
        g = phi_domega2(omega, x)
        return VectorField(grid, g, g, j_invariant=True)
    if j == 3:
        g = phi_dx_domega(omega, x)
        return VectorField(grid, g, g, j_invariant=True)
    if j == 4:
        g = 1j * x * phi_domega(omega, x)
        return VectorField(grid, g, -g, j_invariant=True)
    raise ValueError(f"j must be in 1..4, got {j}")


def kernel_basis(omega: float, grid: Grid) -> Tuple[VectorField, ...]:
    return tuple(eigenfunction_Y(omega, j, grid) for j in range(1, 5))


def resonance_Phi(omega: float, sign: int, grid: Grid) -> VectorField:
    """
    Threshold resonances Phi_+ = (tanh^2, -sech^2)/sqrt(2 pi) and Phi_- = sigma_1 Phi_+.

    Args:
        omega: Scaling parameter
        sign: +1 or -1
        grid: Spatial grid
    """
    argument = np.sqrt(omega) * grid.x
    plus = VectorField(grid, np.tanh(argument) ** 2 / SQRT_2PI,
                       -1.0 / np.cosh(argument) ** 2 / SQRT_2PI, j_invariant=False)
    if sign == 1:
        return plus
    if sign == -1:
        return pauli_1(plus)
    raise ValueError(f"sign must be +1 or -1, got {sign}")


def pairing_table(omega: float, grid: Grid) -> np.ndarray:
    """Matrix of <Y_i, sigma_2 Y_j>, i, j = 1..4."""
    basis = kernel_basis(omega, grid)
    table = np.zeros((4, 4), dtype=complex)
    for i, left in enumerate(basis):
        for j, right in enumerate(basis):
            table[i, j] = inner_product_vector(left, pauli_2(right))
    return table


# (numerator partner, denominator pair) of each d_j
_COEFFICIENT_PARTNERS = ((2, 1), (1, 2), (4, 3), (3, 4))


def project_discrete(U: VectorField, omega: float) -> Tuple[DiscreteCoefficients, VectorField]:
    """
    Coefficients d_j and the discrete component P_d U = sum d_j Y_j.

    d1 = <U, s2 Y2>/<Y1, s2 Y2>, d2 = <U, s2 Y1>/<Y2, s2 Y1>,
    d3 = <U, s2 Y4>/<Y3, s2 Y4>, d4 = <U, s2 Y3>/<Y4, s2 Y3>.

    Raises:
        NumericalFailure: if a denominator pairing vanishes
    """
    basis = kernel_basis(omega, U.grid)
    coefficients = []
    for own, partner in _COEFFICIENT_PARTNERS:
        partner_field = pauli_2(basis[partner - 1])
        denominator = inner_product_vector(basis[own - 1], partner_field)
        if abs(denominator) < TOLERANCES["pairing_floor"]:
            raise NumericalFailure(f"vanishing pairing <Y{own}, s2 Y{partner}> at omega={omega}")
        coefficients.append(inner_product_vector(U, partner_field) / denominator)

    discrete = VectorField.zeros(U.grid)
    for coefficient, Y in zip(coefficients, basis):
        discrete = discrete + Y * coefficient
    return DiscreteCoefficients(*coefficients), discrete


def project_essential(U: VectorField, omega: float) -> VectorField:
    """P_e U = U - P_d U."""
    _, discrete = project_discrete(U, omega)
    essential = U - discrete
    return VectorField(U.grid, essential.first, essential.second, j_invariant=U.j_invariant)


def eigen_relation_residuals(omega: float, grid: Grid) -> Dict[str, float]:
    """
    L-infinity residuals of the six eigen-relations.

    The resonance relations are measured on |x| < 0.8 L, where the periodic wrap of
    the non-decaying tanh^2 does not reach.
    """
    op = LinearizedOperator(omega, grid)
    Y1, Y2, Y3, Y4 = kernel_basis(omega, grid)
    residuals = {
        "H Y1 = 0": apply_H(op, Y1).sup_norm(),
        "H Y2 = i Y1": (apply_H(op, Y2) - Y1 * 1j).sup_norm(),
        "H Y3 = 0": apply_H(op, Y3).sup_norm(),
        "H Y4 = -2i Y3": (apply_H(op, Y4) - Y3 * (-2j)).sup_norm(),
    }
    window = grid.interior_mask(TOLERANCES["resonance_window"])
    for sign, label in ((1, "H Phi+ = w Phi+"), (-1, "H Phi- = -w Phi-")):
        resonance = resonance_Phi(omega, sign, grid)
        defect = apply_H(op, resonance) - resonance * (sign * omega)
        residuals[label] = float(max(np.max(np.abs(defect.first[window])),
                                     np.max(np.abs(defect.second[window]))))
    return residuals

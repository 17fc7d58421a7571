"""
Solitary waves of the focusing cubic NLS and its conserved functionals.

The ground state is phi_w(x) = sqrt(2w) sech(sqrt(w) x), the positive even
solution of -phi'' + w phi = phi^3.  The family

    e^{ipx} e^{i(w - p^2)t} e^{i gamma} phi_w(x - 2pt - sigma)

is generated from it by phase rotation, Galilei boost, scaling and translation.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from nlslab.classes.grid_field import ComplexField, Grid, spectral_derivative
from nlslab.config import PerturbationKind
from nlslab.logging_helpers import get_logger

logger = get_logger("soliton")


@dataclass(frozen=True)
class SolitonParams:
    """Modulation tuple (omega, gamma, p, sigma)."""

    omega: float
    gamma: float = 0.0
    p: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    def as_array(self) -> np.ndarray:
        return np.array([self.omega, self.gamma, self.p, self.sigma], dtype=float)

    @classmethod
    def from_array(cls, values) -> "SolitonParams":
        omega, gamma, p, sigma = (float(v) for v in values)
        return cls(omega, gamma, p, sigma)


class ConservedQuantities(NamedTuple):
    mass: float
    momentum: float
    energy: float


def phi(omega: float, y: np.ndarray) -> np.ndarray:
    root = np.sqrt(omega)
    return np.sqrt(2.0 * omega) / np.cosh(root * y)


def phi_dx(omega: float, y: np.ndarray) -> np.ndarray:
    root = np.sqrt(omega)
    return -np.sqrt(2.0) * omega * np.tanh(root * y) / np.cosh(root * y)


def phi_domega(omega: float, y: np.ndarray) -> np.ndarray:
    """Closed form of d(phi_w)/dw."""
    root = np.sqrt(omega)
    sech = 1.0 / np.cosh(root * y)
    tanh = np.tanh(root * y)
    return sech / np.sqrt(2.0 * omega) - (y / np.sqrt(2.0)) * sech * tanh


def phi_domega2(omega: float, y: np.ndarray) -> np.ndarray:
    """Closed form of d^2(phi_w)/dw^2."""
    root = np.sqrt(omega)
    sech = 1.0 / np.cosh(root * y)
    tanh = np.tanh(root * y)
    scale = 2.0 * np.sqrt(2.0)
    return (
        -y * tanh * sech / (scale * omega)
        - sech / (scale * omega * root)
        - y ** 2 * sech * (sech ** 2 - tanh ** 2) / (scale * root)
    )


def ground_state(omega: float, grid: Grid) -> ComplexField:
    """
    Sample phi_w(x) = sqrt(2w) sech(sqrt(w) x) on the grid.

    Args:
        omega: Scaling parameter, must be positive
        grid: Spatial grid

    Returns:
        Real positive even field
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return ComplexField(grid, phi(omega, grid.x))


def _wrap(grid: Grid, y: np.ndarray) -> np.ndarray:
    period = 2.0 * grid.half_width
    return np.mod(y + grid.half_width, period) - grid.half_width


def solitary_wave(params: SolitonParams, t: float, grid: Grid) -> ComplexField:
    """
    Member of the 4-parameter family at time t, translated periodically.

    Args:
        params: (omega, gamma, p, sigma) of the family
        t: Time
        grid: Spatial grid

    Returns:
        e^{ipx} e^{i(w-p^2)t} e^{i gamma} phi_w(x - 2pt - sigma)
    """
    center = float(_wrap(grid, np.array(2.0 * params.p * t + params.sigma)))
    width = 1.0 / np.sqrt(params.omega)
    if grid.half_width - abs(center) < 5.0 * width:
        logger.warning(f"Soliton center {center:.3f} is within 5 widths of the boundary")

    x = grid.x
    phase = params.p * x + (params.omega - params.p ** 2) * t + params.gamma
    return ComplexField(grid, np.exp(1j * phase) * phi(params.omega, _wrap(grid, x - center)))


def decomposition_params(params: SolitonParams, t: float) -> SolitonParams:
    """
    Express the family member at time t as e^{ip(x-s)} e^{ig} phi_w(x-s).

    Args:
        params: Family parameters (omega, gamma0, p, sigma0)
        t: Time

    Returns:
        Moving-frame parameters with s = 2pt + sigma0 and g = gamma0 + (w - p^2)t + p s
    """
    center = 2.0 * params.p * t + params.sigma
    gamma = params.gamma + (params.omega - params.p ** 2) * t + params.p * center
    return SolitonParams(params.omega, gamma, params.p, center)


def conserved_quantities(psi: ComplexField) -> ConservedQuantities:
    """
    Mass, momentum and energy of a field.

    M = 1/2 int |psi|^2, P = 1/2 Im int psi_x conj(psi), E = int 1/2 |psi_x|^2 - 1/4 |psi|^4.
    """
    dx = psi.grid.dx
    values = psi.values
    derivative = spectral_derivative(psi, 1).values
    density = np.abs(values) ** 2
    mass = 0.5 * np.sum(density) * dx
    momentum = 0.5 * np.imag(np.sum(derivative * np.conj(values))) * dx
    energy = np.sum(0.5 * np.abs(derivative) ** 2 - 0.25 * density ** 2) * dx
    return ConservedQuantities(float(mass), float(momentum), float(energy))


def perturbed_initial_data(params: SolitonParams, grid: Grid, kind: str = "gaussian",
                           amplitude: float = 0.0, width: float = 1.0, center: float = 0.0,
                           phase: float = 0.0) -> ComplexField:
    """
    Initial data e^{ip(x-s)} e^{ig} (phi_w(x-s) + u0(x-s)).

    Args:
        params: Soliton parameters at t=0
        grid: Spatial grid
        kind: "gaussian" or "none"
        amplitude: Radiation size epsilon
        width: Gaussian width
        center: Bump center in the soliton frame
        phase: Constant phase of the bump

    Returns:
        Field psi_0
    """
    perturbation = PerturbationKind(kind)
    y = _wrap(grid, grid.x - params.sigma)
    profile = phi(params.omega, y).astype(complex)
    if perturbation is PerturbationKind.GAUSSIAN and amplitude != 0.0:
        profile = profile + amplitude * np.exp(1j * phase) * np.exp(-(((y - center) / width) ** 2))
    gauge = np.exp(1j * (params.p * (grid.x - params.sigma) + params.gamma))
    logger.debug(f"Initial data: {perturbation.value} perturbation of size {amplitude}")
    return ComplexField(grid, gauge * profile)


def soliton_energy(omega: float) -> float:
    return -2.0 / 3.0 * omega ** 1.5


def soliton_mass(omega: float) -> float:
    return 2.0 * np.sqrt(omega)


def phi_dx_domega(omega: float, y: np.ndarray) -> np.ndarray:
    """Closed form of d/dx d(phi_w)/dw."""
    root = np.sqrt(omega)
    sech = 1.0 / np.cosh(root * y)
    tanh = np.tanh(root * y)
    return -np.sqrt(2.0) * sech * tanh - (root * y / np.sqrt(2.0)) * sech * (sech ** 2 - tanh ** 2)

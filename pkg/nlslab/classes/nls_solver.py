"""
Strang split-step Fourier integrator for i psi_t + psi_xx + |psi|^2 psi = 0.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from nlslab.classes.grid_field import ComplexField, Grid
from nlslab.classes.soliton import conserved_quantities
from nlslab.config import DEFAULT_EXPERIMENT, TOLERANCES
from nlslab.errors import NumericalFailure
from nlslab.logging_helpers import get_logger

logger = get_logger("nls_solver")


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    mass: float
    momentum: float
    energy: float
    boundary_mass: float
    flagged: bool


@dataclass
class Trajectory:
    """Stored frames of one run and their conservation monitor."""

    grid: Grid
    times: List[float] = field(default_factory=list)
    snapshots: List[ComplexField] = field(default_factory=list)
    monitor: List[MonitorRecord] = field(default_factory=list)

    def append(self, t: float, psi: ComplexField, record: MonitorRecord) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(f"times must increase, got {t} after {self.times[-1]}")
        self.times.append(t)
        self.snapshots.append(psi)
        self.monitor.append(record)

    @property
    def boundary_clean(self) -> bool:
        return not any(record.flagged for record in self.monitor)

    def clean_until(self) -> float:
        """Last stored time before the boundary monitor first fired."""
        for index, record in enumerate(self.monitor):
            if record.flagged:
                return self.times[max(index - 1, 0)]
        return self.times[-1]

    def mass_drift(self) -> float:
        masses = np.array([record.mass for record in self.monitor])
        return float(np.max(np.abs(masses - masses[0])) / max(masses[0], np.finfo(float).tiny))

    def energy_drift(self) -> float:
        energies = np.array([record.energy for record in self.monitor])
        scale = max(abs(energies[0]), np.finfo(float).tiny)
        return float(np.max(np.abs(energies - energies[0])) / scale)


def linear_multiplier(grid: Grid, dt: float) -> np.ndarray:
    """Fourier multiplier of the free flow psi_t = i psi_xx over dt."""
    return np.exp(-1j * dt * grid.k ** 2)


def _strang(values: np.ndarray, grid: Grid, multiplier: np.ndarray, dt: float) -> np.ndarray:
    values = values * np.exp(0.5j * dt * np.abs(values) ** 2)
    values = grid.ifft(grid.fft(values) * multiplier)
    return values * np.exp(0.5j * dt * np.abs(values) ** 2)


def nonlinear_substep(psi: ComplexField, dt: float) -> ComplexField:
    """Exact flow of i psi_t + |psi|^2 psi = 0 over dt."""
    return ComplexField(psi.grid, psi.values * np.exp(1j * dt * np.abs(psi.values) ** 2))


def step_strang(psi: ComplexField, dt: float) -> ComplexField:
    """
    Advance one Strang step: half nonlinear phase, full linear step, half nonlinear phase.

    Args:
        psi: Current field
        dt: Time step, positive

    Returns:
        Field at t + dt

    Raises:
        NumericalFailure: if the step produced NaN or inf
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = psi.grid
    values = _strang(psi.values, grid, linear_multiplier(grid, dt), dt)
    if not np.all(np.isfinite(values)):
        raise NumericalFailure("non-finite values after Strang step")
    return ComplexField(grid, values)


def boundary_mass(psi: ComplexField, fraction: Optional[float] = None) -> float:
    """int_{|x| > fraction L} |psi|^2 dx."""
    fraction = TOLERANCES["boundary_fraction"] if fraction is None else fraction
    outside = ~psi.grid.interior_mask(fraction)
    return float(np.sum(np.abs(psi.values[outside]) ** 2) * psi.grid.dx)


def evolve(psi0: ComplexField, T: float, dt: float = DEFAULT_EXPERIMENT["time"]["dt"],
           store_every: int = DEFAULT_EXPERIMENT["time"]["store_every"],
           boundary_threshold: float = DEFAULT_EXPERIMENT["tolerances"]["boundary_monitor"]
           ) -> Trajectory:
    """
    Integrate to time T storing every `store_every`-th step.

    Args:
        psi0: Initial data
        T: Final time, positive
        dt: Time step
        store_every: Steps between stored frames
        boundary_threshold: Boundary-mass flag level relative to M(0)

    Returns:
        Trajectory with frames at t = 0, store_every*dt, ..., T

    Raises:
        NumericalFailure: if NaN appears during integration
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if store_every < 1:
        raise ValueError(f"store_every must be >= 1, got {store_every}")

    grid = psi0.grid
    n_steps = int(round(T / dt))
    multiplier = linear_multiplier(grid, dt)
    trajectory = Trajectory(grid)

    mass0 = conserved_quantities(psi0).mass
    flag_level = boundary_threshold * mass0

    def record(t: float, psi: ComplexField) -> None:
        quantities = conserved_quantities(psi)
        edge = boundary_mass(psi)
        flagged = mass0 > 0 and edge > flag_level
        if flagged and trajectory.boundary_clean:
            logger.warning(f"Boundary mass {edge:.3e} exceeds {flag_level:.3e} at t={t:.3f}")
        trajectory.append(t, psi, MonitorRecord(t, *quantities, edge, flagged))

    logger.info(f"Evolving {n_steps:,} steps of dt={dt} on n={grid.n_points}, L={grid.half_width}")
    record(0.0, psi0)
    values = psi0.values
    progress_every = max(1, n_steps // 10)
    for step in range(1, n_steps + 1):
        values = _strang(values, grid, multiplier, dt)
        if step % store_every == 0 or step == n_steps:
            if not np.all(np.isfinite(values)):
                raise NumericalFailure(f"non-finite field at t={step * dt:.6g}")
            record(step * dt, ComplexField(grid, values))
        if step % progress_every == 0:
            logger.debug(f"Strang step {step:,}/{n_steps:,}")

    logger.info(f"Stored {len(trajectory.times)} frames; mass drift {trajectory.mass_drift():.2e}")
    return trajectory

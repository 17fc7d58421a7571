import os
import sys

import numpy as np
import numpy.testing as npt
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from nlslab.classes.grid_field import ComplexField, Grid
from nlslab.classes.nls_solver import MonitorRecord, Trajectory, boundary_mass, evolve, nonlinear_substep, step_strang
from nlslab.classes.soliton import SolitonParams, ground_state, perturbed_initial_data, solitary_wave
from nlslab.errors import NumericalFailure


class TestExactSolutions:
    @classmethod
    def setup_class(cls):
        """One short soliton run shared by the exactness checks."""
        cls.grid = Grid(2048, 40.0)
        cls.trajectory = evolve(ground_state(1.0, cls.grid), T=1.0, dt=1e-3, store_every=250)

    def test_frames(self):
        npt.assert_allclose(self.trajectory.times, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert len(self.trajectory.snapshots) == len(self.trajectory.monitor) == 5

    def test_soliton_phase_rotation(self):
        """The ground state only picks up the phase e^{it}."""
        expected = np.exp(1j * 1.0) * ground_state(1.0, self.grid).values
        assert np.max(np.abs(self.trajectory.snapshots[-1].values - expected)) < 1e-6

    def test_mass_conservation(self):
        assert self.trajectory.mass_drift() < 1e-12

    def test_boundary_clean(self):
        assert self.trajectory.boundary_clean
        assert self.trajectory.clean_until() == pytest.approx(1.0)

    def test_plane_wave(self):
        """A e^{i(kx - (k^2 - A^2)t)} is reproduced exactly by the splitting."""
        grid = Grid(256, 10.0)
        k = 3 * np.pi / grid.half_width
        amplitude = 0.7
        psi = ComplexField(grid, amplitude * np.exp(1j * k * grid.x))
        t = 0.0
        for _ in range(100):
            psi = step_strang(psi, 0.01)
            t += 0.01
        expected = amplitude * np.exp(1j * (k * grid.x - (k ** 2 - amplitude ** 2) * t))
        assert np.max(np.abs(psi.values - expected)) < 1e-10

    def test_moving_soliton(self):
        """A boosted soliton follows the explicit family."""
        params = SolitonParams(1.0, 0.0, 0.5, -2.0)
        trajectory = evolve(solitary_wave(params, 0.0, self.grid), T=1.0, dt=1e-3, store_every=1000)
        expected = solitary_wave(params, 1.0, self.grid).values
        assert np.max(np.abs(trajectory.snapshots[-1].values - expected)) < 1e-5


class TestSubsteps:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(256, 10.0)

    def test_nonlinear_substep_keeps_modulus(self):
        psi = ground_state(2.0, self.grid)
        stepped = nonlinear_substep(psi, 0.3)
        npt.assert_allclose(np.abs(stepped.values), np.abs(psi.values), rtol=1e-14)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            step_strang(ground_state(1.0, self.grid), 0.0)

    def test_nan_raises_numerical_failure(self):
        values = np.ones(self.grid.n_points, dtype=complex)
        values[3] = np.nan
        with pytest.raises(NumericalFailure):
            step_strang(ComplexField(self.grid, values), 1e-3)

    def test_evolve_argument_checks(self):
        psi = ground_state(1.0, self.grid)
        with pytest.raises(ValueError):
            evolve(psi, T=0.0)
        with pytest.raises(ValueError):
            evolve(psi, T=1.0, store_every=0)


class TestMonitor:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(1024, 20.0)

    def test_boundary_mass_of_centered_soliton(self):
        assert boundary_mass(ground_state(1.0, self.grid)) < 1e-14

    def test_boundary_flag_fires(self):
        """Mass placed near the edge trips the monitor from the first frame."""
        x = self.grid.x
        psi = ComplexField(self.grid, np.exp(-(x - 19.0) ** 2))
        trajectory = evolve(psi, T=0.1, dt=1e-2, store_every=5, boundary_threshold=1e-6)
        assert not trajectory.boundary_clean
        assert trajectory.clean_until() == pytest.approx(0.0)

    def test_trajectory_rejects_non_increasing_times(self):
        trajectory = Trajectory(self.grid)
        psi = ground_state(1.0, self.grid)
        record = MonitorRecord(0.0, 1.0, 0.0, -1.0, 0.0, False)
        trajectory.append(0.0, psi, record)
        with pytest.raises(ValueError):
            trajectory.append(0.0, psi, record)

    def test_perturbed_energy_drift(self):
        """Energy drifts at second order in dt on a perturbed run."""
        grid = Grid(2048, 40.0)
        psi0 = perturbed_initial_data(SolitonParams(1.0), grid, "gaussian", amplitude=0.05)
        trajectory = evolve(psi0, T=2.0, dt=1e-3, store_every=100)
        assert trajectory.mass_drift() < 1e-12
        assert trajectory.energy_drift() < 1e-5

    def test_strang_second_order(self):
        """Halving dt cuts the error against a fine-step reference by about four."""
        grid = Grid(1024, 40.0)
        psi0 = perturbed_initial_data(SolitonParams(1.0), grid, "gaussian", amplitude=0.05)
        reference = evolve(psi0, T=1.0, dt=1.25e-3, store_every=10000).snapshots[-1].values
        errors = [np.max(np.abs(evolve(psi0, T=1.0, dt=dt, store_every=10000).snapshots[-1].values - reference))
                  for dt in (1e-2, 5e-3)]
        assert 3.5 < errors[0] / errors[1] < 4.5


@pytest.mark.slow
class TestLongRuns:
    def test_soliton_exact_at_t10(self):
        grid = Grid(4096, 40.0)
        trajectory = evolve(ground_state(1.0, grid), T=10.0, dt=1e-3, store_every=1000)
        expected = np.exp(10j) * ground_state(1.0, grid).values
        assert np.max(np.abs(trajectory.snapshots[-1].values - expected)) < 1e-6

    def test_conservation_over_t50(self):
        """An off-center, phased bump on the reference box keeps M, P and E and never reaches the edge."""
        grid = Grid(8192, 200.0)
        psi0 = perturbed_initial_data(SolitonParams(1.0), grid, "gaussian", amplitude=0.05, width=4.0,
                                      center=1.0, phase=0.5)
        trajectory = evolve(psi0, T=50.0, dt=1e-3, store_every=1000)
        assert trajectory.boundary_clean
        assert trajectory.mass_drift() < 1e-12
        assert trajectory.energy_drift() < 1e-6
        momenta = np.array([record.momentum for record in trajectory.monitor])
        assert abs(momenta[0]) > 1e-6
        assert np.max(np.abs(momenta - momenta[0])) < 1e-8

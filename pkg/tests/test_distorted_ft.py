import os
import sys

import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from nlslab.classes.grid_field import Grid, VectorField, inner_product_vector, pauli_3, spectral_derivative_vector
from nlslab.classes.linop import LinearizedOperator, apply_H, kernel_basis, project_essential
from nlslab.classes.nls_solver import evolve
from nlslab.classes.soliton import SolitonParams, perturbed_initial_data
from nlslab.extract.asymptotics import build_spectrum_series
from nlslab.transform.distorted_ft import (
    DistortedSpectrum,
    FrequencyGrid,
    correction_K,
    correction_L,
    dft_forward,
    dft_forward_at,
    dft_inverse,
    propagate_spectrum,
    psi_basis,
    representation_pairing,
    sample_spectrum,
    scattering_relation_defect,
    stationary_phase_field,
    symbol_m1,
    symbol_m1_dx,
    symbol_m2,
    symbol_m2_dx,
)
from nlslab.transform.modulation import track


def gaussian_field(grid, center=0.5, speed=0.3, amplitude=1.0):
    bump = amplitude * np.exp(-((grid.x - center) ** 2)) * np.exp(1j * speed * grid.x)
    return VectorField(grid, bump, np.conj(bump), j_invariant=True)


class TestBasis:
    def test_symbols_at_infinity(self):
        """m1 -> 1 and m2 -> 0 far from the soliton."""
        xi = np.linspace(-3, 3, 7)
        npt.assert_allclose(symbol_m1(1.0, 60.0, xi), (xi + 1j) ** 2 / (np.abs(xi) - 1j) ** 2)
        npt.assert_allclose(np.abs(symbol_m1(1.0, 60.0, xi)), 1.0)
        assert np.max(np.abs(symbol_m2(1.0, 60.0, xi))) < 1e-40

    def test_symbol_derivatives(self):
        """Closed-form x-derivatives of m1, m2 used by the K corrections."""
        x = np.linspace(-4, 4, 81)
        h = 1e-6
        for xi in (-1.5, 0.0, 0.7):
            npt.assert_allclose(symbol_m1_dx(1.3, x, xi),
                                (symbol_m1(1.3, x + h, xi) - symbol_m1(1.3, x - h, xi)) / (2 * h), atol=1e-8)
            npt.assert_allclose(symbol_m2_dx(1.3, x, xi),
                                (symbol_m2(1.3, x + h, xi) - symbol_m2(1.3, x - h, xi)) / (2 * h), atol=1e-8)

    def test_psi_basis_broadcasts(self):
        x = np.linspace(-5, 5, 11)[:, None]
        xi = np.linspace(-2, 2, 5)[None, :]
        assert psi_basis(1.0, x, xi, 1).shape == (11, 5)
        with pytest.raises(ValueError):
            psi_basis(1.0, x, xi, 3)

    def test_frequency_grid(self):
        fgrid = FrequencyGrid(5, 2.0)
        npt.assert_allclose(fgrid.nodes, [-2, -1, 0, 1, 2])
        assert fgrid.spacing == pytest.approx(1.0)
        with pytest.raises(ValueError):
            FrequencyGrid(4, 2.0)

    def test_spectrum_shape_check(self):
        with pytest.raises(ValueError):
            DistortedSpectrum(1.0, FrequencyGrid(5, 2.0), np.zeros(4), np.zeros(5))


class TestForward:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(2048, 40.0)
        cls.fgrid = FrequencyGrid(1025, 12.0)
        cls.omega = 1.0
        cls.F = gaussian_field(cls.grid)
        cls.spectrum = dft_forward(cls.F, cls.omega, cls.fgrid)

    @pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
    def test_annihilates_kernel(self, omega):
        """The transform sees only the essential part: F[Y_j] = 0."""
        for Y in kernel_basis(omega, self.grid):
            assert dft_forward(Y, omega, self.fgrid).sup_norm() < 1e-6

    def test_scattering_relation(self):
        assert scattering_relation_defect(self.spectrum) < 1e-8

    def test_matches_direct_pairing(self):
        """The flat-transform rewrite equals <F, s3 Psi_+-> summed on the grid."""
        xi = np.array([-1.7, 0.0, 0.4, 2.5])
        x = self.grid.x[:, None]
        psi_1 = psi_basis(self.omega, x, xi[None, :], 1)
        psi_2 = psi_basis(self.omega, x, xi[None, :], 2)
        first, second = self.F.first[:, None], self.F.second[:, None]
        direct_plus = np.sum(first * np.conj(psi_1) - second * np.conj(psi_2), axis=0) * self.grid.dx
        direct_minus = np.sum(first * np.conj(psi_2) - second * np.conj(psi_1), axis=0) * self.grid.dx
        f_plus, f_minus = dft_forward_at(self.F, self.omega, xi)
        npt.assert_allclose(f_plus, direct_plus, atol=1e-12)
        npt.assert_allclose(f_minus, direct_minus, atol=1e-12)

    def test_no_boundary_warning_for_localized_field(self):
        assert self.spectrum.warnings == ()

    def test_boundary_warning_for_wide_field(self):
        wide = VectorField(self.grid, np.ones(self.grid.n_points), np.ones(self.grid.n_points))
        assert dft_forward(wide, self.omega, self.fgrid).warnings

    def test_sigma3_correction(self):
        """F_+[s3 F] = F_+[F] + L_+[F] and F_-[s3 F] = -F_-[F] + L_-[F]."""
        flipped = dft_forward(pauli_3(self.F), self.omega, self.fgrid)
        npt.assert_allclose(flipped.f_plus,
                            self.spectrum.f_plus + correction_L(self.F, self.omega, self.fgrid, 1), atol=1e-10)
        npt.assert_allclose(flipped.f_minus,
                            -self.spectrum.f_minus + correction_L(self.F, self.omega, self.fgrid, -1), atol=1e-10)

    def test_derivative_correction(self):
        """F_+-[dF/dx] = i xi F_+-[F] + K_+-[F]."""
        derivative = dft_forward(spectral_derivative_vector(self.F, 1), self.omega, self.fgrid)
        xi = self.fgrid.nodes
        npt.assert_allclose(derivative.f_plus,
                            1j * xi * self.spectrum.f_plus + correction_K(self.F, self.omega, self.fgrid, 1),
                            atol=1e-9)
        npt.assert_allclose(derivative.f_minus,
                            1j * xi * self.spectrum.f_minus + correction_K(self.F, self.omega, self.fgrid, -1),
                            atol=1e-9)

    def test_correction_sign_validation(self):
        with pytest.raises(ValueError):
            correction_L(self.F, self.omega, self.fgrid, 0)
        with pytest.raises(ValueError):
            correction_K(self.F, self.omega, self.fgrid, 2)


class TestRepresentation:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(2048, 40.0)
        cls.fgrid = FrequencyGrid()
        cls.omega = 1.0
        cls.F = gaussian_field(cls.grid)
        cls.G = gaussian_field(cls.grid, center=-0.8, speed=-0.6, amplitude=0.5)
        cls.S_F = dft_forward(cls.F, cls.omega, cls.fgrid)
        cls.S_G = dft_forward(cls.G, cls.omega, cls.fgrid)

    def test_roundtrip(self):
        """Inverse after forward reproduces P_e F with relative L2 error below 1e-4."""
        expected = project_essential(self.F, self.omega)
        synthesized = dft_inverse(self.S_F, self.grid)
        error = np.sqrt(np.sum(np.abs(synthesized.first - expected.first) ** 2
                               + np.abs(synthesized.second - expected.second) ** 2))
        norm = np.sqrt(np.sum(np.abs(expected.first) ** 2 + np.abs(expected.second) ** 2))
        assert error / norm < 1e-4

    def test_pairing_at_time_zero(self):
        """<P_e F, s3 G> from spectra agrees with the x-quadrature."""
        direct = inner_product_vector(project_essential(self.F, self.omega), pauli_3(self.G))
        spectral = representation_pairing(self.S_F, self.S_G)
        assert abs(spectral - direct) < 1e-6 * max(1.0, abs(direct))

    def test_pairing_requires_shared_frequencies(self):
        other = dft_forward(self.G, self.omega, FrequencyGrid(1025, 12.0))
        with pytest.raises(ValueError):
            representation_pairing(self.S_F, other)

    def test_propagation_is_unimodular(self):
        evolved = propagate_spectrum(self.S_F, 3.0)
        npt.assert_allclose(np.abs(evolved.f_plus), np.abs(self.S_F.f_plus))
        back = propagate_spectrum(evolved, -3.0)
        npt.assert_allclose(back.f_minus, self.S_F.f_minus, atol=1e-14)

    def test_sample_outside_is_zero(self):
        f_plus, f_minus = sample_spectrum(self.S_F, np.array([-20.0, 0.0, 20.0]))
        assert f_plus[0] == 0 and f_minus[2] == 0
        npt.assert_allclose(f_plus[1], self.S_F.f_plus[self.fgrid.n_xi // 2])

    def test_stationary_phase_leading_term(self):
        """At t = 20 the leading term captures e^{-itH} P_e F on the box."""
        t = 20.0
        exact = dft_inverse(propagate_spectrum(self.S_F, -t), self.grid)
        leading = stationary_phase_field(self.S_F, t, self.grid)
        scale = exact.sup_norm()
        assert np.max(np.abs(exact.first - leading.first)) < 0.1 * scale
        with pytest.raises(ValueError):
            stationary_phase_field(self.S_F, 0.0, self.grid)


def dense_H(omega, grid):
    """Matrix of the discrete H(w) acting on stacked (first, second) samples."""
    op = LinearizedOperator(omega, grid)
    n = grid.n_points
    columns = []
    for k in range(2 * n):
        unit = np.zeros(2 * n, dtype=complex)
        unit[k] = 1.0
        image = apply_H(op, VectorField(grid, unit[:n], unit[n:]))
        columns.append(np.concatenate([image.first, image.second]))
    return np.array(columns).T


class TestLinearFlow:
    @classmethod
    def setup_class(cls):
        """e^{itH} at t = 0.5 and t = 1 from the matrix exponential of the discrete operator."""
        cls.grid = Grid(512, 24.0)
        cls.fgrid = FrequencyGrid(1025, 12.0)
        cls.omega = 1.0
        half = scipy.linalg.expm(0.5j * dense_H(cls.omega, cls.grid))
        cls.propagators = {0.5: half, 1.0: half @ half}
        cls.F = gaussian_field(cls.grid)
        cls.G = gaussian_field(cls.grid, center=-0.8, speed=-0.6, amplitude=0.5)
        cls.S_F = dft_forward(cls.F, cls.omega, cls.fgrid)
        cls.S_G = dft_forward(cls.G, cls.omega, cls.fgrid)

    def evolved(self, U, t):
        n = self.grid.n_points
        values = self.propagators[t] @ np.concatenate([U.first, U.second])
        return VectorField(self.grid, values[:n], values[n:])

    @pytest.mark.parametrize("t", [0.5, 1.0])
    def test_transform_diagonalizes_flow(self, t):
        """<e^{itH} P_e F, s3 G> computed on the grid matches the spectral pairing."""
        direct = inner_product_vector(self.evolved(project_essential(self.F, self.omega), t), pauli_3(self.G))
        spectral = representation_pairing(self.S_F, self.S_G, t)
        assert abs(spectral - direct) < 1e-5 * max(1.0, abs(direct))

    @pytest.mark.parametrize("t", [0.5, 1.0])
    def test_evolved_kernel_is_annihilated(self, t):
        """e^{itH} keeps the generalized kernel inside the discrete subspace."""
        for Y in kernel_basis(self.omega, self.grid):
            assert dft_forward(self.evolved(Y, t), self.omega, self.fgrid).sup_norm() < 1e-6

    def test_propagated_spectrum_matches_evolved_field(self):
        """propagate_spectrum(F[P_e F], 1) is the transform of e^{iH} P_e F."""
        evolved = dft_forward(self.evolved(project_essential(self.F, self.omega), 1.0), self.omega, self.fgrid)
        predicted = propagate_spectrum(self.S_F, 1.0)
        scale = self.S_F.sup_norm()
        assert np.max(np.abs(evolved.f_plus - predicted.f_plus)) < 1e-5 * scale
        assert np.max(np.abs(evolved.f_minus - predicted.f_minus)) < 1e-5 * scale


class TestSolverProfiles:
    @classmethod
    def setup_class(cls):
        """A tiny bump evolves linearly, so its profile e^{+-it(xi^2+w)} F_+-[V(t)] stays put."""
        grid = Grid(2048, 40.0)
        psi0 = perturbed_initial_data(SolitonParams(1.0), grid, "gaussian", amplitude=1e-4)
        trajectory = evolve(psi0, T=1.0, dt=1e-4, store_every=1000)
        series = track(trajectory, seed=SolitonParams(1.0))
        cls.spectra, _ = build_spectrum_series(series, FrequencyGrid(1025, 12.0), stride=5)

    def test_spectrum_times(self):
        npt.assert_allclose(self.spectra.t, [0.0, 0.5, 1.0])

    @pytest.mark.parametrize("index", [1, 2])
    def test_profile_constant_under_linear_flow(self, index):
        start = self.spectra.profile(0)
        later = self.spectra.profile(index)
        scale = start.sup_norm()
        assert scale > 0
        change = max(np.max(np.abs(later.f_plus - start.f_plus)), np.max(np.abs(later.f_minus - start.f_minus)))
        assert change / scale < 1e-3

import os
import sys

import numpy as np
import numpy.testing as npt
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from nlslab.classes.grid_field import (
    ComplexField,
    Grid,
    VectorField,
    check_J_invariance,
    fourier_shift,
    h1_norm,
    inner_product_scalar,
    inner_product_vector,
    pauli_1,
    pauli_2,
    pauli_3,
    parseval_sum,
    spectral_derivative,
    trapezoid_weights,
    vector_h1_norm,
)
from nlslab.errors import GridMismatchError


class TestGrid:
    @classmethod
    def setup_class(cls):
        """Shared grid for the container tests."""
        cls.grid = Grid(1024, 20.0)

    def test_nodes_and_spacing(self):
        """Nodes start at -L and stop one step short of L."""
        assert self.grid.dx == pytest.approx(40.0 / 1024)
        assert self.grid.x[0] == pytest.approx(-20.0)
        assert self.grid.x[-1] == pytest.approx(20.0 - self.grid.dx)

    def test_rejects_non_power_of_two(self):
        """n must be a power of two."""
        with pytest.raises(ValueError):
            Grid(1000, 20.0)

    def test_rejects_nonpositive_width(self):
        with pytest.raises(ValueError):
            Grid(1024, 0.0)

    def test_interior_mask(self):
        mask = self.grid.interior_mask(0.5)
        assert np.all(np.abs(self.grid.x[mask]) < 10.0)
        assert not np.any(mask[:10])


class TestFields:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(2048, 40.0)
        cls.gaussian = ComplexField(cls.grid, np.exp(-cls.grid.x ** 2))

    def test_values_are_read_only_copies(self):
        """Mutating the source array does not touch the field."""
        source = np.ones(self.grid.n_points, dtype=complex)
        field = ComplexField(self.grid, source)
        source[0] = 5.0
        assert field.values[0] == 1.0
        with pytest.raises(ValueError):
            field.values[0] = 2.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ComplexField(self.grid, np.zeros(10))

    def test_gaussian_norm(self):
        """int exp(-2x^2) dx = sqrt(pi/2)."""
        npt.assert_allclose(inner_product_scalar(self.gaussian, self.gaussian).real, np.sqrt(np.pi / 2), rtol=1e-12)

    def test_parseval(self):
        """Spatial and frequency-side norms agree under the unnormalized FFT."""
        field = ComplexField(self.grid, np.exp(-self.grid.x ** 2 + 0.7j * self.grid.x))
        npt.assert_allclose(parseval_sum(field), inner_product_scalar(field, field).real, rtol=1e-12)

    def test_grid_mismatch(self):
        other = ComplexField(Grid(1024, 40.0), np.zeros(1024))
        with pytest.raises(GridMismatchError):
            inner_product_scalar(self.gaussian, other)
        with pytest.raises(GridMismatchError):
            self.gaussian + other

    def test_vector_pairing_adds_slots(self):
        U = VectorField(self.grid, self.gaussian.values, 2 * self.gaussian.values)
        expected = 5 * np.sqrt(np.pi / 2)
        npt.assert_allclose(inner_product_vector(U, U).real, expected, rtol=1e-12)


class TestDerivatives:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(2048, 40.0)
        x = cls.grid.x
        cls.field = ComplexField(cls.grid, np.exp(-x ** 2) * np.exp(0.5j * x))
        cls.first = (-2 * x + 0.5j) * np.exp(-x ** 2) * np.exp(0.5j * x)
        cls.second = ((-2 * x + 0.5j) ** 2 - 2) * np.exp(-x ** 2) * np.exp(0.5j * x)

    def test_first_derivative(self):
        npt.assert_allclose(spectral_derivative(self.field, 1).values, self.first, atol=1e-10)

    def test_second_derivative(self):
        npt.assert_allclose(spectral_derivative(self.field, 2).values, self.second, atol=1e-9)

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            spectral_derivative(self.field, 3)

    def test_fourier_shift(self):
        """Shifting samples f(x + s)."""
        x = self.grid.x
        shifted = fourier_shift(self.field, 1.3)
        expected = np.exp(-(x + 1.3) ** 2) * np.exp(0.5j * (x + 1.3))
        npt.assert_allclose(shifted.values, expected, atol=1e-10)

    def test_h1_norm_of_gaussian(self):
        """||f||^2 + ||f'||^2 = sqrt(pi/2) (1 + 1) for exp(-x^2)."""
        gaussian = ComplexField(self.grid, np.exp(-self.grid.x ** 2))
        npt.assert_allclose(h1_norm(gaussian), np.sqrt(2 * np.sqrt(np.pi / 2)), rtol=1e-10)

    def test_vector_h1_norm_of_j_invariant_pair(self):
        gaussian = ComplexField(self.grid, np.exp(-self.grid.x ** 2) * np.exp(0.3j * self.grid.x))
        pair = VectorField.from_scalar(gaussian)
        npt.assert_allclose(vector_h1_norm(pair), np.sqrt(2.0) * h1_norm(gaussian), rtol=1e-12)


class TestStructure:
    @classmethod
    def setup_class(cls):
        cls.grid = Grid(256, 10.0)
        x = cls.grid.x
        cls.U = VectorField.from_scalar(ComplexField(cls.grid, np.exp(-x ** 2 + 1j * x)))

    def test_from_scalar_is_j_invariant(self):
        assert self.U.j_invariant
        assert check_J_invariance(self.U) == 0.0

    def test_pauli_actions(self):
        a, b = self.U.first, self.U.second
        npt.assert_array_equal(pauli_1(self.U).first, b)
        npt.assert_array_equal(pauli_2(self.U).first, -1j * b)
        npt.assert_array_equal(pauli_2(self.U).second, 1j * a)
        npt.assert_array_equal(pauli_3(self.U).second, -b)

    def test_complex_scalar_drops_j_invariance(self):
        assert (self.U * 2.0).j_invariant
        assert not (self.U * 1j).j_invariant
        assert check_J_invariance(self.U * 1j) > 0

    def test_trapezoid_weights(self):
        weights = trapezoid_weights(np.linspace(-1, 1, 5))
        npt.assert_allclose(weights, [0.25, 0.5, 0.5, 0.5, 0.25])
        assert weights.sum() == pytest.approx(2.0)

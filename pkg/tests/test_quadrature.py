"""
Tests for spectral/quadrature.py.
"""

import math

import numpy as np
import pytest

from spectral.quadrature import (
    ball_quadrature,
    box_quadrature,
    gauss_legendre,
    so3_quadrature,
    sphere_quadrature,
)


class TestGaussLegendre:
    def test_weights_sum_to_interval_length(self):
        _, weights = gauss_legendre(7)
        assert weights.sum() == pytest.approx(2.0, abs=1e-14)

    def test_arrays_are_read_only(self):
        nodes, _ = gauss_legendre(5)
        with pytest.raises(ValueError):
            nodes[0] = 0.0


class TestSphere:
    def test_probability_weights(self):
        quad = sphere_quadrature(4)
        assert quad.weights.sum() == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(np.linalg.norm(quad.nodes, axis=1), 1.0, atol=1e-14)

    def test_second_moment(self):
        quad = sphere_quadrature(1, margin=0)
        assert quad.integrate(quad.nodes[:, 0] ** 2).real == pytest.approx(1 / 3, abs=1e-14)

    def test_degree(self):
        assert sphere_quadrature(3, margin=5).degree == 11

    def test_cached(self):
        assert sphere_quadrature(2, 4) is sphere_quadrature(3, 2)

    def test_negative_arguments(self):
        with pytest.raises(ValueError):
            sphere_quadrature(-1)


class TestSO3:
    def test_probability_weights(self):
        quad = so3_quadrature(6)
        assert quad.weights().sum() == pytest.approx(1.0, abs=1e-14)
        assert quad.weights().shape == quad.shape

    def test_rotated_vectors_average_to_zero(self):
        quad = so3_quadrature(4)
        rotated = quad.rotate([0.3, -0.2, 0.9])
        assert rotated.shape == (*quad.shape, 3)
        np.testing.assert_allclose(
            np.linalg.norm(rotated, axis=-1), np.linalg.norm([0.3, -0.2, 0.9]), atol=1e-14
        )
        mean = np.einsum("abg,abgk->k", quad.weights(), rotated)
        np.testing.assert_allclose(mean, 0.0, atol=1e-14)

    def test_second_moment(self):
        quad = so3_quadrature(4)
        rotated = quad.rotate([0.0, 0.0, 1.0])
        second = np.einsum("abg,abg->", quad.weights(), rotated[..., 0] ** 2)
        assert second == pytest.approx(1 / 3, abs=1e-14)

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            so3_quadrature(-2)


class TestBallAndBox:
    def test_ball_volume(self):
        _, w = ball_quadrature([0.1, 0.2, 0.3], 1.5, 1.0)
        assert w.sum() == pytest.approx(4 / 3 * math.pi * 1.5**3, rel=1e-13)

    def test_ball_plane_wave(self):
        k = np.array([1.0, 2.0, 2.0])
        radius = 1.0
        points, w = ball_quadrature([0.0, 0.0, 0.0], radius, 3.0)
        numeric = np.sum(w * np.exp(1j * points @ k))
        kr = 3.0 * radius
        exact = 4 * math.pi * (math.sin(kr) - kr * math.cos(kr)) / 3.0**3
        assert numeric == pytest.approx(exact, abs=1e-10)

    def test_box_volume(self):
        _, w = box_quadrature([0, -1, 2], [1, 1, 5], 2.0)
        assert w.sum() == pytest.approx(6.0, rel=1e-13)

    def test_box_plane_wave(self):
        k = np.array([2.0, -1.0, 3.5])
        points, w = box_quadrature([0, 0, 0], [1, 1, 1], float(np.linalg.norm(k)))
        numeric = np.sum(w * np.exp(1j * points @ k))
        exact = np.prod((np.exp(1j * k) - 1.0) / (1j * k))
        assert numeric == pytest.approx(exact, abs=1e-12)

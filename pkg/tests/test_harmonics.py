"""
Tests for spectral/harmonics.py: Euler angles, Wigner matrices, spherical
harmonics and Bessel helpers.
"""

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation
from scipy.special import eval_legendre

from spectral.harmonics import (
    bessel_j,
    character,
    degree_slice,
    euler_zyz,
    plane_wave_degree,
    rotation_angle,
    rotation_from_euler,
    sh_eval,
    sh_matrix,
    sphere_index,
    wigner_d,
    wigner_small_d,
)
from spectral.quadrature import sphere_quadrature


def _random_rotation(rng):
    return Rotation.random(random_state=rng).as_matrix()


class TestEulerAngles:
    def test_round_trip(self, rng):
        for _ in range(5):
            rot = _random_rotation(rng)
            alpha, beta, gamma = euler_zyz(rot)
            back = rotation_from_euler(alpha[0], beta[0], gamma[0])
            np.testing.assert_allclose(back, rot, atol=1e-12)

    @pytest.mark.parametrize("beta", [0.0, math.pi])
    def test_gimbal_lock(self, beta):
        rot = rotation_from_euler(0.4, beta, 1.1)
        alpha, b, gamma = euler_zyz(rot)
        np.testing.assert_allclose(rotation_from_euler(alpha[0], b[0], gamma[0]), rot, atol=1e-12)

    def test_stack_shape(self, rng):
        stack = np.stack([_random_rotation(rng) for _ in range(4)])
        alpha, beta, gamma = euler_zyz(stack)
        assert alpha.shape == beta.shape == gamma.shape == (4,)

    def test_rotation_angle(self):
        rot = Rotation.from_rotvec([0.0, 0.0, 0.8]).as_matrix()
        assert rotation_angle(rot) == pytest.approx(0.8)


class TestWigner:
    @pytest.mark.parametrize("l", [1, 2, 5])
    def test_multiplicative(self, rng, l):
        r, s = _random_rotation(rng), _random_rotation(rng)
        np.testing.assert_allclose(wigner_d(l, r @ s), wigner_d(l, r) @ wigner_d(l, s), atol=1e-11)

    @pytest.mark.parametrize("l", [0, 3, 8])
    def test_unitary(self, rng, l):
        d = wigner_d(l, _random_rotation(rng))
        np.testing.assert_allclose(d.conj().T @ d, np.eye(2 * l + 1), atol=1e-12)

    def test_z_rotation_is_diagonal(self):
        phi = 0.7
        l = 3
        rot = Rotation.from_rotvec([0.0, 0.0, phi]).as_matrix()
        m = np.arange(-l, l + 1)
        np.testing.assert_allclose(wigner_d(l, rot), np.diag(np.exp(-1j * m * phi)), atol=1e-12)

    def test_trace_is_character(self, rng):
        rot = _random_rotation(rng)
        for l in range(5):
            trace = np.trace(wigner_d(l, rot))
            assert trace.real == pytest.approx(character(l, rotation_angle(rot)), abs=1e-10)
            assert abs(trace.imag) < 1e-10

    def test_small_d_identity_at_zero(self):
        np.testing.assert_allclose(wigner_small_d(4, 0.0), np.eye(9), atol=1e-13)

    def test_small_d_batched(self):
        betas = np.array([0.1, 0.9, 2.3])
        batch = wigner_small_d(2, betas)
        assert batch.shape == (3, 5, 5)
        np.testing.assert_allclose(batch[1], wigner_small_d(2, 0.9), atol=1e-15)

    def test_small_d_degree_one(self):
        beta = 0.6
        d = wigner_small_d(1, beta)
        assert d[1, 1] == pytest.approx(math.cos(beta), abs=1e-14)
        assert d[2, 2] == pytest.approx((1 + math.cos(beta)) / 2, abs=1e-14)

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            wigner_small_d(-1, 0.3)

    def test_character_at_identity(self):
        assert character(4, 0.0) == pytest.approx(9.0)


class TestSphericalHarmonics:
    def test_constant_harmonic(self):
        assert sh_eval(0, 0, [0.3, 0.4, 0.5]) == pytest.approx(1.0)

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            sh_eval(1, 2, [0.0, 0.0, 1.0])

    def test_orthonormal_on_sphere(self):
        L = 5
        quad = sphere_quadrature(L, margin=0)
        y = sh_matrix(L, quad.nodes)
        gram = y.conj().T @ (quad.weights[:, None] * y)
        np.testing.assert_allclose(gram, np.eye(y.shape[1]), atol=1e-12)

    def test_rotated_basis(self, rng):
        L = 4
        rot = _random_rotation(rng)
        points = rng.standard_normal((20, 3))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        base = sh_matrix(L, points)
        rotated = sh_matrix(L, points @ rot)  # Y(R⁻¹ξ)
        for l in range(L + 1):
            sl = degree_slice(l)
            np.testing.assert_allclose(rotated[:, sl], base[:, sl] @ wigner_d(l, rot), atol=1e-10)

    def test_matrix_agrees_with_pointwise(self):
        xi = np.array([0.2, -0.5, 0.8])
        xi /= np.linalg.norm(xi)
        row = sh_matrix(3, xi[None])[0]
        assert row[sphere_index(3, -2)] == pytest.approx(sh_eval(3, -2, xi), abs=1e-13)

    def test_addition_theorem(self, rng):
        l = 4
        xi = rng.standard_normal((20, 3))
        eta = rng.standard_normal((20, 3))
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        eta /= np.linalg.norm(eta, axis=1, keepdims=True)
        sl = degree_slice(l)
        summed = np.sum(sh_matrix(l, xi)[:, sl] * sh_matrix(l, eta)[:, sl].conj(), axis=1)
        expected = (2 * l + 1) * eval_legendre(l, np.sum(xi * eta, axis=1))
        np.testing.assert_allclose(summed, expected, atol=1e-11)


class TestBessel:
    def test_order_zero(self):
        t = np.array([0.5, 1.0, 7.0])
        np.testing.assert_allclose(bessel_j(0, t), np.sin(t) / t, rtol=1e-13)

    def test_plane_wave_degree(self):
        assert plane_wave_degree(0.0) == 0
        small, large = plane_wave_degree(1.0), plane_wave_degree(20.0)
        assert 0 < small < large
        assert large > 20
        assert (2 * large + 1) * abs(float(bessel_j(large, 20.0))) <= 1e-15

    def test_order_one_series(self):
        t = 0.1
        series = t / 3 - t**3 / 30 + t**5 / 840 - t**7 / 45360
        assert float(bessel_j(1, t)) == pytest.approx(series, abs=1e-12)

    def test_first_zero_of_order_zero(self):
        assert float(bessel_j(0, math.pi)) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("l", range(17))
    def test_bounded_by_one(self, l):
        t = np.linspace(0.0, 100.0, 10_000)
        assert np.all(np.abs(bessel_j(l, t)) <= 1.0)

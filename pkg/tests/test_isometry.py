"""
Tests for domain/entities/isometry.py and measure.py: rigid motions and
atomic measures.
"""

import math

import numpy as np
import pytest

from domain.entities.isometry import Isometry, orthonormalize, rotation_drift
from domain.entities.measure import AtomicMeasure
from domain.errors import InvalidIsometryError


def _random_isometries(rng, n):
    return [Isometry.random(rng, scale=0.7) for _ in range(n)]


class TestGroupAxioms:
    def test_associativity(self, rng):
        a, b, c = _random_isometries(rng, 3)
        left = a.compose(b).compose(c)
        right = a.compose(b.compose(c))
        assert left.distance(right) < 1e-12

    def test_identity_is_neutral(self, rng):
        (g,) = _random_isometries(rng, 1)
        e = Isometry.identity()
        assert g.compose(e).distance(g) < 1e-14
        assert e.compose(g).distance(g) < 1e-14

    def test_inverse(self, rng):
        (g,) = _random_isometries(rng, 1)
        assert g.compose(g.inverse()).distance(Isometry.identity()) < 1e-12
        assert g.inverse().compose(g).distance(Isometry.identity()) < 1e-12

    def test_compose_matches_action(self, rng):
        g, h = _random_isometries(rng, 2)
        x = rng.standard_normal(3)
        np.testing.assert_allclose(g.compose(h).apply(x), g.apply(h.apply(x)), atol=1e-12)

    def test_apply_many_points(self, rng):
        (g,) = _random_isometries(rng, 1)
        pts = rng.standard_normal((5, 3))
        out = g.apply(pts)
        assert out.shape == (5, 3)
        np.testing.assert_allclose(out[2], g.apply(pts[2]), atol=1e-14)


class TestConstructors:
    def test_quaternion_scalar_first(self):
        half = math.pi / 4
        g = Isometry.from_quaternion([math.cos(half), 0.0, 0.0, math.sin(half)])
        np.testing.assert_allclose(g.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-14)

    def test_axis_angle_matches_quaternion(self):
        angle = 1.2309594173407747
        a = Isometry.from_axis_angle([1, 0, 0], angle, [0.3, -0.1, 0.2])
        q = Isometry.from_quaternion([math.cos(angle / 2), math.sin(angle / 2), 0, 0],
                                     [0.3, -0.1, 0.2])
        assert a.distance(q) < 1e-14

    def test_zero_quaternion_rejected(self):
        with pytest.raises(InvalidIsometryError):
            Isometry.from_quaternion([0, 0, 0, 0])

    def test_reflection_rejected(self):
        with pytest.raises(InvalidIsometryError):
            Isometry(np.diag([1.0, 1.0, -1.0]), np.zeros(3))

    def test_bad_translation_shape(self):
        with pytest.raises(InvalidIsometryError):
            Isometry(np.eye(3), np.zeros(2))

    def test_small_drift_repaired(self):
        rot = np.eye(3)
        rot[0, 1] = 1e-9
        g = Isometry(rot, np.zeros(3))
        assert float(rotation_drift(g.rotation)) <= 1e-12

    def test_large_drift_rejected(self):
        with pytest.raises(InvalidIsometryError):
            orthonormalize(np.eye(3) * 1.01)

    def test_values_are_frozen(self):
        g = Isometry.identity()
        with pytest.raises(ValueError):
            g.rotation[0, 0] = 2.0


class TestAtomicMeasure:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(InvalidIsometryError):
            AtomicMeasure(np.eye(3)[None].repeat(2, 0), np.zeros((2, 3)), np.array([0.5, 0.4]))

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(InvalidIsometryError):
            AtomicMeasure(np.eye(3)[None].repeat(2, 0), np.eye(3)[:2], np.array([1.5, -0.5]))

    def test_duplicate_atoms_merge(self):
        g = Isometry.from_translation([0.1, 0.0, 0.0])
        mu = AtomicMeasure.from_atoms([(g, 0.25), (g, 0.25), (Isometry.identity(), 0.5)])
        assert mu.size == 2
        assert sorted(mu.weights.tolist()) == pytest.approx([0.5, 0.5])

    def test_moments(self):
        mu = AtomicMeasure.uniform(
            [Isometry.from_translation([1.0, 0, 0]), Isometry.from_translation([-1.0, 0, 0])]
        )
        m = mu.moments()
        assert m.C == pytest.approx(1.0)
        assert m.fourth_moment == pytest.approx(1.0)
        np.testing.assert_allclose(m.mean_translation, 0.0, atol=1e-15)
        assert m.max_radius == pytest.approx(1.0)

    def test_symmetric_fixture(self, two_generator):
        assert two_generator.is_symmetric()
        assert two_generator.size == 4

    def test_asymmetric_detected(self):
        mu = AtomicMeasure.dirac(Isometry.from_translation([0.2, 0.0, 0.0]))
        assert not mu.is_symmetric()

    def test_is_close_ignores_order(self, two_generator):
        reordered = AtomicMeasure(
            two_generator.rotations[::-1], two_generator.translations[::-1],
            two_generator.weights[::-1],
        )
        assert reordered.is_close(two_generator)

    def test_pure_rotation_flag(self, pure_rotation, two_generator):
        assert pure_rotation.is_pure_rotation
        assert not two_generator.is_pure_rotation

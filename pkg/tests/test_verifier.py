"""
Tests for application/verifier.py: the norm inequalities checked on
assembled operators.
"""

import numpy as np
import pytest

from application.verifier import (
    ORACLE_CSV_HEADER,
    aligning_rotation,
    conjugation_check,
    constants_oracle,
    dirichlet_check,
    oracle_check,
    radial_domination_check,
    small_x_check,
)
from domain.entities.reports import FAIL, INFO
from domain.errors import NotCenteredError, PreflightError, RadiiDifferError, UsageError
from domain.group_core import center
from spectral.operators import peter_weyl_dim
from utils.rng import RandomStreams

SMALL_GRID = [[0.01, 0.0, 0.0], [0.0, 0.03, 0.0], [0.02, 0.0, 0.04]]


@pytest.fixture
def centred(two_generator):
    return center(two_generator)


class TestAligningRotation:
    def test_maps_a_to_b(self):
        a = np.array([0.3, -0.4, 1.2])
        b = np.array([1.3, 0.0, 0.0])
        h = aligning_rotation(a, b)
        np.testing.assert_allclose(h @ a, b, atol=1e-12)
        np.testing.assert_allclose(h.T @ h, np.eye(3), atol=1e-12)

    def test_zero_vector(self):
        np.testing.assert_array_equal(aligning_rotation(np.zeros(3), np.zeros(3)), np.eye(3))


class TestConjugation:
    def test_passes(self, two_generator):
        report = conjugation_check(two_generator, [0.5, 0.0, 0.0], [0.0, 0.3, 0.4], 2)
        assert report.passed
        assert {c.name for c in report.checks} == {"norm-difference", "conjugation-residual"}

    def test_radii_must_match(self, two_generator):
        with pytest.raises(RadiiDifferError) as info:
            conjugation_check(two_generator, [0.5, 0.0, 0.0], [0.0, 0.6, 0.0], 2)
        assert info.value.exit_status == 2


class TestRadialDomination:
    def test_sphere_below_so3(self, two_generator):
        report = radial_domination_check(two_generator, [0.0, 0.7, 0.0], 2)
        assert report.passed
        (check,) = report.checks
        assert check.context["sphere_norm"] <= check.context["so3_norm"] + 1e-6


class TestOracle:
    def test_origin(self, two_generator):
        assert constants_oracle(two_generator, np.zeros(3)) == pytest.approx(1.0)

    def test_matrix_agrees_with_closed_form(self, two_generator):
        report = oracle_check(two_generator, [[0.05, 0.0, 0.0], [0.0, 0.02, 0.03]], 3)
        assert report.passed
        rows = report.details["rows"]
        assert len(rows) == 2
        assert all(len(row) == len(ORACLE_CSV_HEADER) for row in rows)

    def test_empty_grid(self, two_generator):
        with pytest.raises(UsageError):
            oracle_check(two_generator, np.zeros((0, 3)), 2)


class TestSmallX:
    def test_bounds_hold(self, centred):
        report = small_x_check(centred, SMALL_GRID, 3, streams=RandomStreams(11))
        assert report.passed, [c.to_dict() for c in report.failures]
        assert report.details["m2"] == pytest.approx(2.0 * report.details["C"], rel=1e-10)
        assert len(report.named("difference-bound")) == len(SMALL_GRID)
        assert report.named("mean-zero-norm") == []

    def test_mean_zero_norm_on_request(self, centred):
        report = small_x_check(centred, SMALL_GRID, 2, streams=RandomStreams(11), mean_zero=True)
        rows = report.named("mean-zero-norm")
        assert len(rows) == len(SMALL_GRID)
        assert all(c.status == INFO for c in rows)
        assert all(c.measured <= 1.0 + 1e-8 for c in rows)

    def test_needs_centred_measure(self, two_generator):
        with pytest.raises(NotCenteredError):
            small_x_check(two_generator, SMALL_GRID, 2)

    def test_needs_translations(self, pure_rotation):
        with pytest.raises(PreflightError) as info:
            small_x_check(pure_rotation, SMALL_GRID, 2)
        assert info.value.code == "degenerate-translations"

    def test_grid_must_be_ordered(self, centred):
        with pytest.raises(UsageError):
            small_x_check(centred, SMALL_GRID[::-1], 2)


class TestDirichlet:
    def test_identity_and_bounds(self, centred):
        report = dirichlet_check(centred, 0.0, [[0.2, 0.0, 0.0], [0.0, 0.9, 0.3]], 2, 2)
        assert report.passed, [c.to_dict() for c in report.failures]
        assert report.details["c2"] is None
        assert len(report.named("dirichlet-identity")) == 2
        assert not report.named("combined-bound")

    def test_combined_bound_needs_positive_c0(self, centred):
        report = dirichlet_check(centred, 1e-3, [[0.3, 0.0, 0.0]], 1, 1)
        assert len(report.named("combined-bound")) == 1
        assert report.details["c2"] == pytest.approx(report.details["c1"] / 2e-3)

    def test_explicit_samples(self, centred):
        dim = peter_weyl_dim(1)
        phis = np.eye(dim, dtype=complex)[:3]
        report = dirichlet_check(centred, 0.0, [[0.0, 0.0, 0.5]], phis, 1)
        assert report.details["samples"] == 3
        assert all(c.status != FAIL for c in report.named("dirichlet-identity"))

    def test_negative_c0(self, centred):
        with pytest.raises(UsageError):
            dirichlet_check(centred, -0.1, [[0.1, 0.0, 0.0]], 1, 1)

"""
Tests for application/reduction.py.
"""

import numpy as np
import pytest

from application.reduction import choose_truncation, minimal_power, reduction_pipeline
from domain.entities.isometry import Isometry
from domain.entities.measure import AtomicMeasure
from domain.entities.reports import INFO
from domain.errors import AssumptionError, AsymmetricMeasureError, NoRotationGapError
from domain.group_core import symmetrize


class TestMinimalPower:
    @pytest.mark.parametrize(
        ("alpha", "ell"), [(1.0, 1), (0.5, 1), (0.3, 2), (0.1, 7), (0.01, 69)]
    )
    def test_values(self, alpha, ell):
        assert minimal_power(alpha) == ell
        assert (1.0 - alpha) ** ell <= 0.5
        if ell > 1:
            assert (1.0 - alpha) ** (ell - 1) > 0.5

    @pytest.mark.parametrize("alpha", [0.0, -0.2, 1.5])
    def test_out_of_range(self, alpha):
        with pytest.raises(ValueError):
            minimal_power(alpha)


class TestChooseTruncation:
    def test_keeps_everything_when_needed(self, two_generator):
        truncated, s, beta = choose_truncation(two_generator, 0.4)
        assert beta == 0.0
        assert s == pytest.approx(float(two_generator.radii().max()))
        assert truncated.is_close(two_generator)

    def test_drops_light_far_atoms(self, two_generator):
        far = symmetrize(AtomicMeasure.dirac(
            Isometry.from_axis_angle([0, 1, 0], 0.4, [5.0, 0.0, 0.0])
        ))
        atoms = [(g, 0.98 * w) for g, w in two_generator] + [(g, 0.02 * w) for g, w in far]
        mu = AtomicMeasure.from_atoms(atoms)
        truncated, s, beta = choose_truncation(mu, 0.2)
        assert beta == pytest.approx(0.02)
        assert s < 5.0
        assert truncated.size == two_generator.size


class TestPipeline:
    def test_postconditions(self, two_generator):
        report = reduction_pipeline(two_generator, 3, probe_radii=(0.5,), probe_L=2)
        assert report.checks.passed
        assert report.power_norm <= 0.5 + 1e-10
        assert report.block_identity_residual <= 1e-9
        assert report.mean_translation <= 1e-10
        assert report.alpha_centered == pytest.approx(report.alpha_truncated, abs=1e-12)
        assert (1.0 - report.alpha_centered) ** report.ell <= 0.5
        assert set(report.measures) == {"mu", "mu_s", "mu_1", "mu_2"}
        assert len(report.probes) == 1

    def test_truncated_gap_check_records_bound(self, two_generator):
        report = reduction_pipeline(two_generator, 2, probe_radii=(), probe_L=1)
        (check,) = report.checks.named("truncated-gap")
        assert check.bound == pytest.approx(1e-8)
        assert check.context["gaps_bound"] == pytest.approx(report.gaps_bound)
        assert check.context["alpha_truncated"] == pytest.approx(report.alpha_truncated)
        assert report.beta < report.alpha / 2

    def test_norm_root_probes_are_informational(self, two_generator):
        report = reduction_pipeline(two_generator, 3, probe_radii=(0.25, 1.5), probe_L=1)
        probes = report.checks.named("norm-root") + report.checks.named("norm-root-truncated")
        assert len(probes) == 4
        assert all(c.status == INFO for c in probes)

    def test_report_serialises(self, two_generator):
        record = reduction_pipeline(two_generator, 2, probe_radii=(0.5,), probe_L=1).to_dict()
        assert record["gap_chain"]["alpha"] == record["alpha"]
        assert isinstance(record["fixed_point_a"], list)
        np.testing.assert_allclose(record["measures"]["mu_1"]["mean_translation"], 0.0,
                                   atol=1e-10)

    def test_common_fixed_point(self, pure_rotation):
        with pytest.raises(AssumptionError) as info:
            reduction_pipeline(pure_rotation, 3)
        assert info.value.code == "assumption-2"

    def test_no_rotation_gap(self):
        mu = symmetrize(AtomicMeasure.dirac(
            Isometry.from_axis_angle([0, 0, 1], 0.6, [0.2, 0.0, 0.1])
        ))
        with pytest.raises(NoRotationGapError):
            reduction_pipeline(mu, 2)

    def test_requires_symmetry(self):
        mu = AtomicMeasure.dirac(Isometry.from_axis_angle([1, 0, 0], 0.5, [0.1, 0.0, 0.0]))
        with pytest.raises(AsymmetricMeasureError):
            reduction_pipeline(mu, 2)

"""
Tests for spectral/norms.py.
"""

import numpy as np
import pytest
from scipy.stats import unitary_group

from domain.errors import UsageError
from spectral.norms import DENSE, POWER, mean_zero_norm, operator_norm
from spectral.operators import so3_operator


def _spectrum_matrix(values, seed=3):
    q = unitary_group.rvs(len(values), random_state=seed)
    return q @ np.diag(values) @ q.conj().T


class TestOperatorNorm:
    def test_diagonal(self):
        est = operator_norm(np.diag([0.5, -2.0, 1.0]))
        assert est.value == pytest.approx(2.0)
        assert est.method == DENSE

    def test_non_hermitian_uses_singular_value(self):
        mat = np.array([[0.0, 3.0], [0.0, 0.0]])
        assert operator_norm(mat).value == pytest.approx(3.0)

    def test_power_iteration(self):
        values = np.concatenate([[3.0, -1.0], np.linspace(-0.5, 0.5, 38)])
        est = operator_norm(_spectrum_matrix(values), method="power",
                            rng=np.random.default_rng(1))
        assert est.method == POWER
        assert est.value == pytest.approx(3.0, abs=1e-9)
        assert est.iterations > 0

    def test_auto_switches_to_power(self):
        values = np.concatenate([[2.0], np.full(19, 0.25)])
        est = operator_norm(_spectrum_matrix(values), dense_max_dim=10)
        assert est.method == POWER
        assert est.value == pytest.approx(2.0, abs=1e-9)

    def test_cross_check(self):
        values = np.concatenate([[1.5, 0.2], np.linspace(-0.1, 0.1, 18)])
        est = operator_norm(_spectrum_matrix(values), cross_check=True)
        assert est.cross_check_gap is not None
        assert est.cross_check_gap < 1e-8
        assert est.value == pytest.approx(1.5, abs=1e-9)

    def test_zero_matrix(self):
        assert operator_norm(np.zeros((4, 4)), method="power").value == 0.0

    def test_rejects_non_square(self):
        with pytest.raises(UsageError):
            operator_norm(np.ones((2, 3)))

    def test_rejects_unknown_method(self):
        with pytest.raises(UsageError):
            operator_norm(np.eye(2), method="lanczos")

    def test_to_dict(self):
        record = operator_norm(np.eye(3)).to_dict()
        assert record["value"] == pytest.approx(1.0)
        assert set(record) == {"value", "residual", "iterations", "method", "cross_check_gap"}


class TestMeanZeroNorm:
    def test_compression_is_smaller(self, two_generator):
        op = so3_operator(two_generator, [0.2, 0.0, 0.1], 2)
        full = operator_norm(op).value
        restricted = mean_zero_norm(op).value
        assert restricted <= full + 1e-12
        assert restricted == pytest.approx(operator_norm(op.matrix[1:, 1:]).value, abs=1e-14)

    def test_rotations_fix_constants(self, pure_rotation):
        op = so3_operator(pure_rotation, [0.3, 0.0, 0.0], 3)
        assert operator_norm(op).value == pytest.approx(1.0, abs=1e-12)
        assert mean_zero_norm(op).value < 1.0

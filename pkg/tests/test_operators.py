"""
Tests for spectral/operators.py: rotation blocks, sphere and SO(3)
operators, Peter–Weyl machinery.
"""

import numpy as np
import pytest
import scipy.linalg
from scipy.spatial.transform import Rotation

from domain.entities.isometry import Isometry
from domain.entities.measure import AtomicMeasure
from domain.errors import AsymmetricMeasureError, UsageError
from spectral.norms import operator_norm
from spectral.operators import (
    PETER_WEYL,
    SPHERE,
    BandLimit,
    PeterWeylGrid,
    constant_vector,
    evaluate_peter_weyl,
    left_regular,
    peter_weyl_dim,
    peter_weyl_indices,
    right_regular,
    rotate_left,
    rotation_blocks,
    rotation_gap,
    so3_operator,
    sphere_operator,
)


class TestIndexing:
    @pytest.mark.parametrize("L", [0, 1, 2, 5])
    def test_dimension(self, L):
        assert peter_weyl_dim(L) == (L + 1) * (2 * L + 1) * (2 * L + 3) // 3

    def test_n_runs_fastest(self):
        l_idx, m_idx, n_idx = peter_weyl_indices(1)
        assert (l_idx[1], m_idx[1], n_idx[1]) == (1, -1, -1)
        assert (l_idx[2], m_idx[2], n_idx[2]) == (1, -1, 0)
        assert (l_idx[4], m_idx[4], n_idx[4]) == (1, 0, -1)

    def test_band_limit(self):
        band = BandLimit(3)
        assert band.sphere_dim == 16
        assert band.so3_dim == peter_weyl_dim(3)
        with pytest.raises(UsageError):
            BandLimit(-1)


class TestRotationBlocks:
    def test_symmetric_measure_gives_hermitian_blocks(self, two_generator):
        blocks = rotation_blocks(two_generator, 5)
        assert blocks.L == 5
        assert blocks.hermitian_residual() < 1e-12
        assert np.all(blocks.norms() <= 1.0 + 1e-12)

    def test_block_matrix(self, pure_rotation):
        blocks = rotation_blocks(pure_rotation, 2)
        assert blocks.as_matrix().shape == (9, 9)

    def test_band_limits_must_match(self, pure_rotation):
        with pytest.raises(UsageError):
            rotation_blocks(pure_rotation, 2) @ rotation_blocks(pure_rotation, 3)


class TestRotationGap:
    def test_gap_is_positive(self, two_generator):
        gap = rotation_gap(two_generator, 4)
        assert 0.0 < gap.alpha < 1.0
        assert 1 <= gap.attaining_l <= 4
        assert not gap.no_gap
        assert len(gap.block_norms) == 5

    def test_gap_shrinks_with_band_limit(self, two_generator):
        assert rotation_gap(two_generator, 8).alpha <= rotation_gap(two_generator, 3).alpha + 1e-15

    def test_single_axis_has_no_gap(self):
        mu = AtomicMeasure.uniform(
            [Isometry.from_axis_angle([0, 0, 1], 0.9), Isometry.from_axis_angle([0, 0, 1], -0.9)]
        )
        gap = rotation_gap(mu, 2)
        assert gap.no_gap

    def test_requires_symmetry(self):
        mu = AtomicMeasure.dirac(Isometry.from_axis_angle([1, 0, 0], 0.5))
        with pytest.raises(AsymmetricMeasureError):
            rotation_gap(mu, 2)

    def test_requires_positive_band(self, two_generator):
        with pytest.raises(UsageError):
            rotation_gap(two_generator, 0)


class TestSphereOperator:
    def test_radius_zero_is_rotation_part(self, two_generator):
        op = sphere_operator(two_generator, 0.0, 3)
        np.testing.assert_allclose(
            op.matrix, rotation_blocks(two_generator, 3).as_matrix(), atol=1e-13
        )
        assert op.basis == SPHERE

    def test_self_adjoint(self, two_generator):
        op = sphere_operator(two_generator, 0.8, 4)
        assert op.hermitian_residual() < 1e-10
        assert operator_norm(op).value <= 1.0 + 1e-10

    def test_translations_only_on_constants(self, translations_only):
        r = 0.7
        op = sphere_operator(translations_only, r, 2)
        # ⟨1, ρ_r(μ)1⟩ = Σ w j₀(2π r |v|)
        t = 2 * np.pi * r * 0.5
        assert op.matrix[0, 0].real == pytest.approx(np.sin(t) / t, abs=1e-12)

    def test_translation_pair_on_constants(self):
        v = np.array([0.2, -0.3, 0.1])
        pair = AtomicMeasure(
            np.eye(3)[None].repeat(2, 0), np.stack([v, -v]), np.array([0.5, 0.5])
        )
        r = 1.3
        op = sphere_operator(pair, r, 3)
        t = 2 * np.pi * r * np.linalg.norm(v)
        assert op.matrix[0, 0].real == pytest.approx(np.sin(t) / t, abs=1e-12)
        assert abs(op.matrix[0, 0].imag) < 1e-12

    def test_margin_covers_phase(self, two_generator):
        op = sphere_operator(two_generator, 5.0, 2, margin=0)
        assert op.assembly_margin > 0
        assert op.header()["L"] == 2

    def test_negative_radius(self, two_generator):
        with pytest.raises(UsageError):
            sphere_operator(two_generator, -0.1, 2)


class TestRegularRepresentations:
    def test_left_regular_is_homomorphism(self, rng):
        r, s = (Rotation.random(random_state=rng).as_matrix() for _ in range(2))
        np.testing.assert_allclose(
            left_regular(r @ s, 2), left_regular(r, 2) @ left_regular(s, 2), atol=1e-11
        )

    def test_right_regular_is_unitary(self, rng):
        h = Rotation.random(random_state=rng).as_matrix()
        sigma = right_regular(h, 2)
        np.testing.assert_allclose(sigma @ sigma.conj().T, np.eye(sigma.shape[0]), atol=1e-12)

    def test_rotate_left_matches_matrix(self, rng):
        rot = Rotation.random(random_state=rng).as_matrix()
        dim = peter_weyl_dim(2)
        coeffs = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        np.testing.assert_allclose(
            rotate_left(coeffs, rot, 2), left_regular(rot, 2) @ coeffs, atol=1e-12
        )

    def test_rotate_left_batch(self, rng):
        rot = Rotation.random(random_state=rng).as_matrix()
        dim = peter_weyl_dim(2)
        batch = rng.standard_normal((4, dim)) + 1j * rng.standard_normal((4, dim))
        rotated = rotate_left(batch, rot, 2)
        for row, out in zip(batch, rotated, strict=True):
            np.testing.assert_allclose(out, rotate_left(row, rot, 2), atol=1e-13)


class TestPeterWeylGrid:
    def test_basis_is_orthonormal(self):
        L = 2
        grid = PeterWeylGrid(L, 2 * L)
        dim = grid.dim
        values = [grid.evaluate(np.eye(dim)[a]) for a in range(dim)]
        gram = np.array(
            [[grid.inner(values[a], values[b]) for b in range(dim)] for a in range(dim)]
        )
        np.testing.assert_allclose(gram, np.eye(dim), atol=1e-12)

    def test_constant_evaluates_to_one(self):
        values = evaluate_peter_weyl(constant_vector(peter_weyl_dim(2)), 2, 6)
        np.testing.assert_allclose(values, 1.0, atol=1e-13)

    def test_multiplication_by_one(self):
        grid = PeterWeylGrid(2, 4)
        ones = np.ones(grid.quad.shape, dtype=complex)
        np.testing.assert_allclose(grid.multiplication_matrix(ones), np.eye(grid.dim), atol=1e-12)

    def test_batch_evaluation_matches_rows(self, rng):
        grid = PeterWeylGrid(2, 5)
        batch = rng.standard_normal((3, grid.dim)) + 1j * rng.standard_normal((3, grid.dim))
        values = grid.evaluate(batch)
        assert values.shape == (3, *grid.quad.shape)
        for row, nodal in zip(batch, values, strict=True):
            np.testing.assert_allclose(nodal, grid.evaluate(row), atol=1e-12)

    def test_grid_too_coarse(self):
        with pytest.raises(UsageError):
            PeterWeylGrid(3, 5)


@pytest.mark.timeout(300)
class TestSO3Operator:
    def test_origin_is_left_regular_average(self, two_generator):
        op = so3_operator(two_generator, np.zeros(3), 2)
        expected = sum(w * left_regular(g.rotation, 2) for g, w in two_generator)
        np.testing.assert_allclose(op.matrix, expected, atol=1e-13)
        assert op.basis == PETER_WEYL

    def test_self_adjoint(self, two_generator):
        op = so3_operator(two_generator, [0.3, 0.1, -0.2], 2)
        assert op.dim == peter_weyl_dim(2)
        assert op.hermitian_residual() < 1e-10

    def test_conjugation_by_right_translation(self, two_generator, rng):
        a = np.array([0.4, 0.0, 0.3])
        h = Rotation.random(random_state=rng).as_matrix()
        t_a = so3_operator(two_generator, a, 2)
        t_b = so3_operator(two_generator, h @ a, 2)
        sigma = right_regular(h, 2)
        np.testing.assert_allclose(t_b.matrix, sigma @ t_a.matrix @ sigma.conj().T, atol=1e-9)

    def test_norm_depends_on_length_only(self, two_generator):
        x = np.array([0.0, 0.6, 0.0])
        y = np.array([0.6, 0.0, 0.0]) @ Rotation.from_rotvec([0.2, 0.5, 0.1]).as_matrix().T
        nx = operator_norm(so3_operator(two_generator, x, 2)).value
        ny = operator_norm(so3_operator(two_generator, y, 2)).value
        assert nx == pytest.approx(ny, abs=1e-9)

    def test_sphere_is_dominated(self, two_generator):
        r = 0.45
        s_norm = operator_norm(sphere_operator(two_generator, r, 2)).value
        t_norm = operator_norm(so3_operator(two_generator, [0.0, 0.0, r], 2)).value
        assert s_norm <= t_norm + 1e-9

    def test_norm_grows_with_band_limit(self, two_generator):
        x = [0.2, 0.1, 0.0]
        small = operator_norm(so3_operator(two_generator, x, 1)).value
        large = operator_norm(so3_operator(two_generator, x, 2)).value
        assert small <= large + 1e-12

    def test_constant_coefficient(self, translations_only):
        x = np.array([0.0, 0.0, 0.9])
        op = so3_operator(translations_only, x, 1)
        t = 2 * np.pi * 0.9 * 0.5
        assert op.matrix[0, 0].real == pytest.approx(np.sin(t) / t, abs=1e-12)
        assert scipy.linalg.norm(op.matrix - op.matrix.conj().T) < 1e-10

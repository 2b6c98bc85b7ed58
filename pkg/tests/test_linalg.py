from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from spikedcov.exceptions import InputError, InvariantError
from spikedcov.linalg import (
    apply_signed_rotation,
    eig2x2_with_angle,
    haar_sample,
    haar_sample_batch,
    jacobi_eigh,
    orthogonality_defect,
    reorthonormalize,
    spectral_decompose,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def random_symmetric(rng, p):
    a = rng.standard_normal((p, p))
    return a + a.T


class TestSpectralDecompose:
    def test_identity(self):
        sp = spectral_decompose(np.eye(4))
        np.testing.assert_allclose(sp.eigenvalues, 1.0)

    def test_diagonal_spikes(self):
        sp = spectral_decompose(np.diag([1.0, 10.0, 50.0, 20.0]))
        np.testing.assert_allclose(sp.eigenvalues, [50, 20, 10, 1])
        np.testing.assert_allclose(np.abs(sp.eigenvectors), np.eye(4)[:, [2, 3, 1, 0]])

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_reconstruction(self, rng, method):
        m = random_symmetric(rng, 5)
        sp = spectral_decompose(m, method)
        assert np.linalg.norm(sp.reconstruct() - m) < 1e-10
        assert np.all(np.diff(sp.eigenvalues) <= 0)

    def test_jacobi_matches_lapack(self, rng):
        m = random_symmetric(rng, 7)
        a = spectral_decompose(m, "lapack")
        b = spectral_decompose(m, "jacobi")
        np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)
        # sign convention makes the vectors comparable directly
        np.testing.assert_allclose(a.eigenvectors, b.eigenvectors, atol=1e-8)

    def test_signs_fixed(self, rng):
        sp = spectral_decompose(random_symmetric(rng, 6))
        v = sp.eigenvectors
        idx = np.argmax(np.abs(v), axis=0)
        assert np.all(v[idx, np.arange(6)] > 0)

    def test_embedded_block(self):
        m = np.zeros((4, 4))
        m[1:3, 1:3] = [[3.0, 1.5], [1.5, -2.0]]
        e = eig2x2_with_angle(3.0, 1.5, -2.0)
        w = spectral_decompose(m).eigenvalues
        np.testing.assert_allclose(sorted(w), sorted([e.s1, e.s2, 0.0, 0.0]), atol=1e-12)

    @pytest.mark.parametrize("bad", [np.array([[1.0, np.nan], [np.nan, 1.0]]), np.ones((2, 3)),
                                     np.array([[1.0, 2.0], [0.0, 1.0]])])
    def test_rejects_bad_input(self, bad):
        with pytest.raises(InputError):
            spectral_decompose(bad)

    def test_jacobi_returns_unsorted_pair(self, rng):
        m = random_symmetric(rng, 4)
        w, v = jacobi_eigh(m)
        np.testing.assert_allclose(v @ np.diag(w) @ v.T, m, atol=1e-10)


class TestEig2x2:
    def test_diagonal(self):
        e = eig2x2_with_angle(2.0, 0.0, 1.0)
        assert (e.s1, e.s2, e.omega) == (2.0, 1.0, 0.0)

    def test_offdiagonal(self):
        e = eig2x2_with_angle(0.0, 1.0, 0.0)
        assert e.s1 == pytest.approx(1.0) and e.s2 == pytest.approx(-1.0)
        assert e.omega == pytest.approx(math.pi / 4)

    def test_ones(self):
        e = eig2x2_with_angle(1.0, 1.0, 1.0)
        assert e.s1 == pytest.approx(2.0) and e.s2 == pytest.approx(0.0, abs=1e-15)
        assert e.omega == pytest.approx(math.pi / 4)

    @given(finite, finite, finite)
    def test_reconstruction_property(self, a, b, d):
        e = eig2x2_with_angle(a, b, d)
        scale = max(abs(a), abs(b), abs(d), 1.0)
        np.testing.assert_allclose(e.reconstruct(), [[a, b], [b, d]], atol=1e-12 * scale)
        assert -math.pi / 2 < e.omega <= math.pi / 2
        assert e.s1 >= e.s2


class TestRotation:
    def test_zero_angle(self, rng):
        g = haar_sample(4, rng)
        np.testing.assert_array_equal(apply_signed_rotation(g, 0, 2, 0.0), g)

    def test_quarter_turn(self):
        out = apply_signed_rotation(np.eye(2), 0, 1, math.pi / 2)
        np.testing.assert_allclose(out[0], [0.0, -1.0], atol=1e-15)
        np.testing.assert_allclose(out[1], [1.0, 0.0], atol=1e-15)

    def test_same_rows(self):
        with pytest.raises(IndexError):
            apply_signed_rotation(np.eye(3), 1, 1, 0.3)

    @settings(max_examples=50)
    @given(st.floats(-10, 10), st.sampled_from([-1, 1]), st.sampled_from([-1, 1]), st.integers(0, 2**32 - 1))
    def test_orthogonality_and_inverse(self, theta, e1, e2, seed):
        rng = np.random.default_rng(seed)
        g = haar_sample(5, rng)
        out = apply_signed_rotation(g, 1, 3, theta, e1, e2)
        assert orthogonality_defect(out) < 1e-12
        undo = out.copy()
        undo[1] *= e1
        undo[3] *= e2
        back = apply_signed_rotation(undo, 1, 3, -theta)
        np.testing.assert_allclose(back, g, atol=1e-12)


class TestReorthonormalize:
    def test_identity_fixed(self):
        np.testing.assert_array_equal(reorthonormalize(np.eye(5)), np.eye(5))

    def test_orthogonal_fixed_point(self, rng):
        g = haar_sample(6, rng)
        g = g * np.sign(np.diag(np.linalg.qr(g)[1]))
        assert np.linalg.norm(reorthonormalize(g) - g) < 1e-12

    def test_repairs_perturbation(self, rng):
        g = haar_sample(8, rng) + 1e-9 * rng.standard_normal((8, 8))
        assert orthogonality_defect(reorthonormalize(g)) < 1e-14

    def test_refuses_far_matrix(self, rng):
        with pytest.raises(InvariantError):
            reorthonormalize(rng.standard_normal((4, 4)))


class TestHaar:
    def test_orthogonal(self, rng):
        assert orthogonality_defect(haar_sample(10, rng)) < 1e-12
        batch = haar_sample_batch(20, 5, rng)
        assert max(orthogonality_defect(g) for g in batch) < 1e-12

    def test_first_moment(self, rng):
        p = 5
        g = haar_sample_batch(100_000, p, rng)
        x = g[:, 0, 0] ** 2
        se = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean() - 1 / p) < 3 * se

    def test_first_column_uniform_on_sphere(self, rng):
        # first coordinate of a uniform point on S^(p-1): (x+1)/2 ~ Beta((p-1)/2, (p-1)/2)
        p = 4
        g = haar_sample_batch(20_000, p, rng)
        x = g[:, 0, 0]
        res = stats.kstest((x + 1) / 2, stats.beta((p - 1) / 2, (p - 1) / 2).cdf)
        edges = stats.beta((p - 1) / 2, (p - 1) / 2).ppf(np.linspace(0, 1, 21)[1:-1])
        counts = np.bincount(np.searchsorted(edges, (x + 1) / 2), minlength=20)
        assert stats.chisquare(counts).pvalue > 1e-3
        assert res.pvalue > 1e-3

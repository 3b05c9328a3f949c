import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdprod import linalg

RNG = np.random.default_rng(7)


def finite_matrix(rows, cols):
    return st.lists(
        st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False),
            min_size=cols, max_size=cols,
        ),
        min_size=rows, max_size=rows,
    ).map(np.array)


def random_symmetric(n, rng=RNG):
    a = rng.normal(size=(n, n))
    return 0.5 * (a + a.T)


class TestFrobeniusDot:
    def test_identity(self):
        assert linalg.frobenius_dot(np.eye(2), np.eye(2)) == 2.0

    def test_zero(self):
        a = random_symmetric(3)
        assert linalg.frobenius_dot(a, np.zeros((3, 3))) == 0.0

    def test_matches_trace_product(self):
        # Independent oracle: A . B == Tr(A B^T) by explicit multiplication.
        for _ in range(20):
            a, b = random_symmetric(4), random_symmetric(4)
            oracle = float(np.trace(a @ b.T))
            assert abs(linalg.frobenius_dot(a, b) - oracle) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linalg.frobenius_dot(np.eye(2), np.eye(3))

    @settings(max_examples=40, deadline=None)
    @given(finite_matrix(3, 3), finite_matrix(3, 3))
    def test_symmetry_exact(self, a, b):
        assert linalg.frobenius_dot(a, b) == linalg.frobenius_dot(b, a)


class TestEntrywiseProduct:
    def test_all_ones_is_identity(self):
        a = RNG.normal(size=(3, 4))
        assert np.array_equal(linalg.entrywise_product(a, np.ones((3, 4))), a)

    def test_zero(self):
        a = RNG.normal(size=(2, 2))
        assert np.array_equal(
            linalg.entrywise_product(a, np.zeros((2, 2))), np.zeros((2, 2))
        )

    def test_mask_idempotent(self):
        e01 = np.zeros((2, 2))
        e01[0, 1] = 1.0
        assert np.array_equal(linalg.entrywise_product(e01, e01), e01)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            linalg.entrywise_product(np.eye(2), np.ones((2, 3)))


class TestKron:
    def test_scalar_one(self):
        b = RNG.normal(size=(2, 3))
        assert np.array_equal(linalg.kron(np.array([[1.0]]), b), b)

    def test_identity(self):
        assert np.array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_dot_factorizes(self):
        # (A (x) B) . (X (x) Y) == (A . X)(B . Y), both sides evaluated
        # independently.
        for _ in range(15):
            a, b = RNG.normal(size=(2, 2)), RNG.normal(size=(2, 2))
            x, y = random_symmetric(2), random_symmetric(2)
            lhs = linalg.frobenius_dot(linalg.kron(a, b), linalg.kron(x, y))
            rhs = linalg.frobenius_dot(a, x) * linalg.frobenius_dot(b, y)
            assert abs(lhs - rhs) < 1e-12

    def test_associative(self):
        for _ in range(10):
            a, b, c = (RNG.normal(size=(2, 2)) for _ in range(3))
            left = linalg.kron(linalg.kron(a, b), c)
            right = linalg.kron(a, linalg.kron(b, c))
            assert np.max(np.abs(left - right)) < 1e-12

    def test_mixed_product_law(self):
        for _ in range(10):
            a, b, c, d = (RNG.normal(size=(3, 3)) for _ in range(4))
            left = linalg.kron(a, b) @ linalg.kron(c, d)
            right = linalg.kron(a @ c, b @ d)
            assert np.max(np.abs(left - right)) < 1e-10


class TestHat:
    def test_one_by_one(self):
        assert np.array_equal(
            linalg.hat(np.array([[3.0]])), np.array([[0.0, 3.0], [3.0, 0.0]])
        )

    def test_rectangular_shape(self):
        a = RNG.normal(size=(2, 3))
        h = linalg.hat(a)
        assert h.shape == (5, 5)
        assert np.array_equal(h, h.T)
        assert np.array_equal(h[:2, :2], np.zeros((2, 2)))
        assert np.array_equal(h[2:, 2:], np.zeros((3, 3)))
        assert np.array_equal(h[:2, 2:], a)

    def test_top_eigenvalue_is_largest_singular_value(self):
        # Oracle: singular values via the eigendecomposition of A^T A.
        for _ in range(10):
            a = RNG.normal(size=(3, 3))
            smax = float(np.sqrt(np.linalg.eigvalsh(a.T @ a)[-1]))
            top = linalg.eigen(linalg.hat(a)).eigenvalues[-1]
            assert abs(top - smax) < 1e-9

    def test_bipartite_tensor_is_principal_submatrix(self):
        # hat(A (x) A) sits inside hat(A) (x) hat(A) on the index pairs
        # (top, top) followed by (bottom, bottom).
        for _ in range(10):
            a = RNG.normal(size=(2, 2))
            r = c = 2
            big = linalg.kron(linalg.hat(a), linalg.hat(a))
            size = r + c
            idx = [i * size + j for i in range(r) for j in range(r)]
            idx += [(r + i) * size + (r + j) for i in range(c) for j in range(c)]
            sub = big[np.ix_(idx, idx)]
            assert np.array_equal(sub, linalg.hat(linalg.kron(a, a)))


class TestEigen:
    def test_identity(self):
        dec = linalg.eigen(np.eye(3))
        assert np.allclose(dec.eigenvalues, [1.0, 1.0, 1.0])

    def test_diagonal_sorted_ascending(self):
        dec = linalg.eigen(np.diag([2.0, -1.0]))
        assert np.allclose(dec.eigenvalues, [-1.0, 2.0])

    def test_hat_of_one(self):
        dec = linalg.eigen(linalg.hat(np.array([[1.0]])))
        assert np.allclose(dec.eigenvalues, [-1.0, 1.0])

    def test_reconstruction_and_orthonormality(self):
        for n in (2, 5, 12):
            a = random_symmetric(n)
            dec = linalg.eigen(a)
            tol = 1e-10 * (1.0 + float(np.max(np.abs(a))))
            assert np.max(np.abs(dec.reconstruct() - a)) < tol
            vtv = dec.eigenvectors.T @ dec.eigenvectors
            assert np.max(np.abs(vtv - np.eye(n))) < 1e-10

    def test_rejects_non_finite(self):
        with pytest.raises(np.linalg.LinAlgError):
            linalg.eigen(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestIsPsd:
    def test_identity(self):
        assert linalg.is_psd(np.eye(2), 1e-9)

    def test_hat_of_one_is_not(self):
        assert not linalg.is_psd(linalg.hat(np.array([[1.0]])), 1e-9)

    def test_gram_vectors(self):
        for _ in range(10):
            v = RNG.normal(size=4)
            assert linalg.is_psd(np.outer(v, v), 1e-9)

    def test_negative_tol_rejected(self):
        with pytest.raises(ValueError):
            linalg.is_psd(np.eye(2), -1.0)


class TestSvec:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**31))
    def test_roundtrip_and_isometry(self, n, seed):
        rng = np.random.default_rng(seed)
        a = random_symmetric(n, rng)
        b = random_symmetric(n, rng)
        assert np.array_equal(linalg.smat(linalg.svec(a), n), a)
        lhs = float(linalg.svec(a) @ linalg.svec(b))
        assert abs(lhs - linalg.frobenius_dot(a, b)) < 1e-10 * (
            1 + abs(linalg.frobenius_dot(a, b))
        )


def test_symmetrize_exact():
    a = RNG.normal(size=(4, 4))
    s = linalg.symmetrize(a)
    assert np.array_equal(s, s.T)
    assert linalg.is_symmetric(s)
    assert not linalg.is_symmetric(a + np.triu(np.ones((4, 4)), 1))

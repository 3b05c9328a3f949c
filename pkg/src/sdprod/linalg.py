"""Dense symmetric-matrix kernel.

Everything in this package runs on small dense matrices (at most a few
hundred rows), so the kernel favours clarity and exactness over speed:
plain numpy arrays, explicit symmetrization, and eigenvalue-based PSD
tests with caller-visible tolerances.

Conventions
-----------
* ``A o B``  : entrywise (Hadamard) product.
* ``A . B``  : Frobenius inner product, sum_ij A_ij B_ij = Tr(A B^T).
* ``hat(A)`` : the bipartite version [[0, A], [A^T, 0]] of an arbitrary
  rectangular matrix, symmetric of size rows+cols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "symmetrize",
    "is_symmetric",
    "sym_matrix",
    "frobenius_dot",
    "entrywise_product",
    "kron",
    "hat",
    "EigenDecomposition",
    "eigen",
    "min_eigenvalue",
    "is_psd",
    "svec_indices",
    "svec",
    "smat",
]

# Default tolerances; every public predicate takes them as parameters.
PSD_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-10


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {m.shape}")
    return m


def symmetrize(a) -> np.ndarray:
    """Return 0.5 * (A + A^T).

    Floating addition is commutative, so the result is exactly symmetric
    entry by entry, not merely up to round-off.
    """
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"cannot symmetrize a {m.shape} matrix")
    return 0.5 * (m + m.T)


def is_symmetric(a) -> bool:
    """Exact entrywise symmetry check (no tolerance)."""
    m = _as_matrix(a)
    return m.shape[0] == m.shape[1] and bool(np.all(m == m.T))


def sym_matrix(a) -> np.ndarray:
    """Construct a symmetric matrix from possibly asymmetric entries.

    Construction symmetrizes; use :func:`is_symmetric` where asymmetric
    input must be rejected instead of repaired.
    """
    return symmetrize(a)


def frobenius_dot(a, b) -> float:
    """Frobenius inner product sum_ij A_ij * B_ij = Tr(A B^T)."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return float(np.sum(ma * mb))


def entrywise_product(a, b) -> np.ndarray:
    """Entrywise product (A o B)[x, y] = A[x, y] * B[x, y]."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return ma * mb


def kron(a, b) -> np.ndarray:
    """Kronecker product; satisfies (A(x)B).(C(x)D) = (A.C)(B.D)."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def hat(a) -> np.ndarray:
    """Bipartite version [[0, A], [A^T, 0]] of a rectangular matrix.

    The result is symmetric of dimension rows+cols with zero diagonal
    blocks; its spectrum is +-(singular values of A) padded with zeros.
    """
    m = _as_matrix(a)
    r, c = m.shape
    out = np.zeros((r + c, r + c))
    out[:r, r:] = m
    out[r:, :r] = m.T
    return out


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvectors.

    ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``; the input is
    reconstructed as V diag(lambda) V^T.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def eigen(a) -> EigenDecomposition:
    """Full symmetric eigendecomposition.

    Raises ``np.linalg.LinAlgError`` if the underlying iteration fails to
    converge (ill-conditioned or non-finite input).
    """
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"eigen requires a square matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise np.linalg.LinAlgError("non-finite entries")
    w, v = np.linalg.eigh(m)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def min_eigenvalue(a) -> float:
    m = _as_matrix(a)
    if not np.all(np.isfinite(m)):
        raise np.linalg.LinAlgError("non-finite entries")
    return float(np.linalg.eigvalsh(m)[0])


def is_psd(a, tol: float = PSD_TOL) -> bool:
    """True iff the minimum eigenvalue is >= -tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return min_eigenvalue(a) >= -tol


# ---------------------------------------------------------------------------
# Symmetric vectorization.
#
# svec maps Sym(n) isometrically onto R^{n(n+1)/2}: diagonal entries are
# copied, off-diagonal entries are scaled by sqrt(2), so that
# frobenius_dot(A, B) == svec(A) . svec(B).  Pair order is (i, j) with
# i <= j, sorted lexicographically.
# ---------------------------------------------------------------------------

_SQRT2 = np.sqrt(2.0)


def svec_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column index arrays of the svec coordinate order."""
    ii, jj = np.triu_indices(n)
    return ii, jj


def svec(a) -> np.ndarray:
    m = _as_matrix(a)
    n = m.shape[0]
    ii, jj = svec_indices(n)
    out = m[ii, jj].copy()
    out[ii != jj] *= _SQRT2
    return out


def smat(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    ii, jj = svec_indices(n)
    if v.shape != ii.shape:
        raise ValueError(f"svec length {v.shape} does not match dimension {n}")
    vals = v.copy()
    vals[ii != jj] /= _SQRT2
    out = np.zeros((n, n))
    out[ii, jj] = vals
    out[jj, ii] = vals
    return out

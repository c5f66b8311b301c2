"""Sparse/dense linear algebra kernels shared by all solver components.

Sparse matrices are scipy CSR matrices with sorted, duplicate-free indices
(canonical format).  All operators here are SPD unless stated otherwise.
"""
import numpy as np
import scipy.sparse as sp
import scipy.linalg as sla

DENSE_LIMIT = 4096


class NonSPDError(ValueError):
    """Raised when an operator that must be SPD turns out not to be."""


def as_csr(A):
    """Return A as a canonical CSR matrix (sorted indices, no duplicates)."""
    A = sp.csr_matrix(A)
    A.sum_duplicates()
    A.sort_indices()
    return A


def validate_csr(A):
    """Check the CSR structural invariants, raising ValueError on violation."""
    if not sp.issparse(A) or A.format != "csr":
        raise ValueError("expected a CSR matrix, got %r" % type(A))
    n_rows, n_cols = A.shape
    if len(A.indptr) != n_rows + 1 or A.indptr[0] != 0:
        raise ValueError("row offsets must have length n_rows+1 and start at 0")
    if np.any(np.diff(A.indptr) < 0):
        raise ValueError("row offsets must be non-decreasing")
    if A.indptr[-1] != len(A.indices) or len(A.indices) != len(A.data):
        raise ValueError("row offsets end (%d) must equal nnz (%d)"
                         % (A.indptr[-1], len(A.indices)))
    if len(A.indices) and (A.indices.min() < 0 or A.indices.max() >= n_cols):
        raise ValueError("column index out of range")
    for i in range(n_rows):
        cols = A.indices[A.indptr[i]:A.indptr[i + 1]]
        if np.any(np.diff(cols) <= 0):
            raise ValueError("columns in row %d not strictly increasing" % i)
    if not np.all(np.isfinite(A.data)):
        raise ValueError("matrix entries must be finite")


def symmetry_error(A):
    """max_ij |A_ij - A_ji|, zero for an exactly symmetric matrix."""
    D = (A - A.T).tocoo()
    return float(np.abs(D.data).max()) if D.nnz else 0.0


def require_symmetric(A, rtol=1e-14):
    """Raise unless max|A_ij - A_ji| <= rtol * max|A_ij|."""
    scale = float(np.abs(A.data).max()) if A.nnz else 0.0
    err = symmetry_error(A)
    if err > rtol * max(scale, 1e-300):
        raise NonSPDError("matrix is not symmetric: max asymmetry %.3e "
                          "exceeds %.1e * max entry %.3e" % (err, rtol, scale))


def spmv(A, x):
    """Matrix-vector product A @ x with an explicit dimension check."""
    x = np.asarray(x)
    if x.shape[0] != A.shape[1]:
        raise ValueError("dimension mismatch: matrix has %d columns, "
                         "vector has length %d" % (A.shape[1], x.shape[0]))
    return A @ x


def inner(x, y):
    """Euclidean inner product."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError("dimension mismatch: vectors have lengths %d and %d"
                         % (x.shape[0], y.shape[0]))
    return float(np.dot(x, y))


def a_inner(A, x, y):
    """A-inner product (A x, y); A must be symmetric."""
    q = inner(spmv(A, x), y)
    if y is x and q < -1e-12 * inner(x, x):
        raise NonSPDError("(Ax, x) = %.3e < 0: operator is not SPD" % q)
    return q


def a_norm(A, x):
    """Energy norm sqrt((A x, x)); negative quadratic form raises NonSPDError."""
    q = inner(spmv(A, x), x)
    if q < -1e-12 * inner(x, x):
        raise NonSPDError("(Ax, x) = %.3e < 0: operator is not SPD" % q)
    return float(np.sqrt(max(q, 0.0)))


def rap(P, A):
    """Galerkin triple product P^t A P, symmetrized to kill round-off skew.

    A must be square symmetric, P a tall prolongator with no empty column
    (an empty column would mean an empty aggregate / lost coarse dof).
    """
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square, got shape %r" % (A.shape,))
    require_symmetric(A)
    if P.shape[0] != A.shape[0]:
        raise ValueError("dimension mismatch: P has %d rows, A has %d"
                         % (P.shape[0], A.shape[0]))
    col_counts = P.getnnz(axis=0)
    if np.any(col_counts == 0):
        j = int(np.argmin(col_counts))
        raise ValueError("empty aggregate: column %d of P has no entries" % j)
    B = P.T @ A @ P
    # sparse matmul rounds the two triangles differently; average them back
    B = (B + B.T) * 0.5
    return as_csr(B)


class DenseFactorization:
    """Cached symmetric (Cholesky) factorization of a small SPD matrix.

    solve() performs one step of iterative refinement so the residual stays
    near machine precision even for badly conditioned coarse operators.
    """

    def __init__(self, A):
        n = A.shape[0]
        if n > DENSE_LIMIT:
            raise ValueError("matrix dimension %d exceeds dense limit %d"
                             % (n, DENSE_LIMIT))
        self.dimension = n
        self._dense = A.toarray() if sp.issparse(A) else np.asarray(A, float)
        try:
            self._factor = sla.cho_factor(self._dense, check_finite=False)
        except sla.LinAlgError as exc:
            raise NonSPDError("non-positive pivot in Cholesky: "
                              "matrix is not SPD (%s)" % exc) from exc

    def solve(self, f):
        f = np.asarray(f, float)
        if f.shape[0] != self.dimension:
            raise ValueError("dimension mismatch: factorization is %d, "
                             "vector has length %d" % (self.dimension, f.shape[0]))
        u = sla.cho_solve(self._factor, f, check_finite=False)
        r = f - self._dense @ u
        return u + sla.cho_solve(self._factor, r, check_finite=False)


def dense_solve(A, f):
    """Solve A u = f exactly via a dense symmetric factorization."""
    return DenseFactorization(A).solve(np.asarray(f, float))


def power_method(A, tol=1e-8, maxiter=500):
    """Estimate the dominant eigenpair of symmetric A by power iteration.

    Starts from the all-ones vector plus a small deterministic perturbation
    (an exactly constant start can be orthogonal to the dominant mode).
    Returns (rayleigh_quotient, eigenvector_estimate, converged).
    """
    n = A.shape[0]
    x = np.ones(n) + 1e-3 * np.cos(np.arange(n))
    x /= np.linalg.norm(x)
    rho = 0.0
    converged = False
    for _ in range(maxiter):
        y = A @ x
        rho_new = float(np.dot(x, y))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, x, True
        x = y / ny
        if abs(rho_new - rho) < tol * abs(rho_new):
            rho = rho_new
            converged = True
            break
        rho = rho_new
    return rho, x, converged


def spectral_radius(A):
    """Power-iteration estimate of rho(A) for symmetric A (last Rayleigh quotient)."""
    rho, _, _ = power_method(A)
    return abs(rho)

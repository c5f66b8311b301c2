"""MatrixMarket matrix import/export and one-value-per-line vector files."""
import numpy as np
import scipy.io
import scipy.sparse as sp

from .linalg import as_csr


def read_matrix(path):
    """Read a MatrixMarket coordinate file; symmetric storage is expanded."""
    A = scipy.io.mmread(path)
    return as_csr(A)


def write_matrix(path, A, symmetric=False):
    """Write A in MatrixMarket coordinate format.

    With symmetric=True only the lower triangle is stored and the file is
    tagged 'symmetric'; readers (including read_matrix) expand it back.
    """
    A = sp.coo_matrix(A)
    symmetry = "symmetric" if symmetric else "general"
    if symmetric:
        keep = A.row >= A.col
        A = sp.coo_matrix((A.data[keep], (A.row[keep], A.col[keep])), shape=A.shape)
    scipy.io.mmwrite(path, A, symmetry=symmetry)


def read_vector(path):
    v = np.loadtxt(path, dtype=float, ndmin=1)
    return v


def write_vector(path, v):
    np.savetxt(path, np.asarray(v, float), fmt="%.17g")

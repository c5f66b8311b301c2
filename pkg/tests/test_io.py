import numpy as np
import scipy.sparse as sp

from mgbench import assemble_poisson, symmetry_error
from mgbench.io import read_matrix, read_vector, write_matrix, write_vector


def test_matrix_roundtrip_general(tmp_path):
    A, _ = assemble_poisson(3)
    path = tmp_path / "a.mtx"
    write_matrix(path, A)
    B = read_matrix(path)
    assert (abs(A - B)).max() == 0.0


def test_symmetric_storage_expanded_on_read(tmp_path):
    A, _ = assemble_poisson(3)
    path = tmp_path / "a_sym.mtx"
    write_matrix(path, A, symmetric=True)
    text = path.read_text()
    assert "symmetric" in text.splitlines()[0]
    B = read_matrix(path)
    assert symmetry_error(B) == 0.0
    assert (abs(A - B)).max() == 0.0


def test_symmetric_file_stores_one_triangle(tmp_path):
    A = sp.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    path = tmp_path / "tri.mtx"
    write_matrix(path, A, symmetric=True)
    entries = [ln for ln in path.read_text().splitlines()
               if ln and not ln.startswith("%")]
    assert len(entries) - 1 == 3  # size line + lower triangle of a 2x2


def test_vector_roundtrip(tmp_path):
    v = np.array([1.5, -2.25, 3.0e-17, 4.0])
    path = tmp_path / "v.txt"
    write_vector(path, v)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    assert len(lines) == 4  # one value per line
    assert np.array_equal(read_vector(path), v)

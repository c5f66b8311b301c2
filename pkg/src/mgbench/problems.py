"""Model problems: linear FEM on uniform triangulations of the unit square.

Level k uses a (2^k x 2^k)-cell grid, h = 2^-k, every cell split along the
lower-left to upper-right diagonal.  Dirichlet boundary rows/columns are
eliminated, leaving the (2^k - 1)^2 interior nodes in lexicographic order
(x fastest).  For the constant-coefficient Laplacian this yields the
classical 5-point stencil with diagonal 4.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import as_csr

MAX_LEVEL = 12

# local stiffness (coefficient 1) for the two right triangles of a cell:
# lower (v0, v1, v2) = (SW, SE, NE), upper (v0, v2, v3) = (SW, NE, NW)
_K_LOWER = 0.5 * np.array([[1.0, -1.0, 0.0],
                           [-1.0, 2.0, -1.0],
                           [0.0, -1.0, 1.0]])
_K_UPPER = 0.5 * np.array([[1.0, 0.0, -1.0],
                           [0.0, 1.0, -1.0],
                           [-1.0, -1.0, 2.0]])


@dataclass(frozen=True)
class MeshLevel:
    """Uniform grid at refinement level k."""
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_LEVEL:
            raise ValueError("level k must be in 1..%d, got %d" % (MAX_LEVEL, self.k))

    @property
    def cells_per_side(self):
        return 2 ** self.k

    @property
    def h(self):
        return 2.0 ** -self.k

    @property
    def nodes_per_side(self):
        return 2 ** self.k - 1

    @property
    def n_interior(self):
        return self.nodes_per_side ** 2

    def interior_coords(self):
        """(x, y) coordinates of interior nodes in lexicographic order."""
        s = np.arange(1, self.cells_per_side) * self.h
        X, Y = np.meshgrid(s, s, indexing="xy")
        return X.ravel(), Y.ravel()


@dataclass(frozen=True)
class CoefficientField:
    """Scalar diffusion coefficient a(x), evaluated at element barycenters.

    kind 'constant' is a(x) = 1.  kind 'jump' is 1 on the two squares
    (0.25,0.5)^2 and (0.5,0.75)^2 and low_value elsewhere.
    """
    kind: str = "constant"
    low_value: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("constant", "jump"):
            raise ValueError("unknown coefficient kind %r" % self.kind)
        if self.low_value <= 0.0:
            raise ValueError("low_value must be positive, got %g" % self.low_value)

    def __call__(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        if self.kind == "constant":
            return np.ones_like(x)
        a = np.full_like(x, self.low_value)
        in1 = (x > 0.25) & (x < 0.5) & (y > 0.25) & (y < 0.5)
        in2 = (x > 0.5) & (x < 0.75) & (y > 0.5) & (y < 0.75)
        a[in1 | in2] = 1.0
        return a


def _assemble(mesh, coefficient):
    """Stiffness matrix over interior nodes and the f=1 load vector."""
    m = mesh.cells_per_side
    h = mesh.h
    n_full = (m + 1) * (m + 1)

    # node ids of cell corners, cells in lexicographic order
    cx, cy = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    cx = cx.ravel()
    cy = cy.ravel()
    sw = cy * (m + 1) + cx
    se = sw + 1
    ne = se + (m + 1)
    nw = sw + (m + 1)

    tri = np.empty((2 * m * m, 3), dtype=np.int64)
    tri[0::2] = np.column_stack([sw, se, ne])
    tri[1::2] = np.column_stack([sw, ne, nw])

    bary_x = np.empty(2 * m * m)
    bary_y = np.empty(2 * m * m)
    x0 = cx * h
    y0 = cy * h
    bary_x[0::2] = x0 + 2.0 * h / 3.0
    bary_y[0::2] = y0 + h / 3.0
    bary_x[1::2] = x0 + h / 3.0
    bary_y[1::2] = y0 + 2.0 * h / 3.0
    a_elem = coefficient(bary_x, bary_y)

    k_local = np.empty((2 * m * m, 3, 3))
    k_local[0::2] = _K_LOWER
    k_local[1::2] = _K_UPPER
    k_local *= a_elem[:, None, None]

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    A_full = sp.csr_matrix((k_local.ravel(), (rows, cols)), shape=(n_full, n_full))

    load_full = np.zeros(n_full)
    np.add.at(load_full, tri.ravel(), (h * h / 2.0) / 3.0)

    gx, gy = np.meshgrid(np.arange(1, m), np.arange(1, m), indexing="xy")
    interior = (gy * (m + 1) + gx).ravel()
    A = as_csr(A_full[interior][:, interior])
    return A, load_full[interior]


def assemble_poisson(k):
    """Poisson stiffness matrix and f=1 load vector at level k."""
    A, load = _assemble(MeshLevel(k), CoefficientField("constant"))
    return A, load


def assemble_jump(k, low=1e-6):
    """Jump-coefficient stiffness matrix and the zero load vector (f = 0).

    Requires k >= 2 so the coefficient-region corners at 0.25/0.5/0.75 are
    grid points and no element straddles an interface.
    """
    if k < 2:
        raise ValueError("jump problem needs k >= 2 "
                         "(coefficient regions not resolvable at k=%d)" % k)
    A, _ = _assemble(MeshLevel(k), CoefficientField("jump", low_value=low))
    return A, np.zeros(A.shape[0])

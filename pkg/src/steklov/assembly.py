"""Sparse assembly of the gradient+mass form M and the boundary-trace
mass form N for the Crouzeix-Raviart and conforming P1 spaces.

Local matrices are integrated in closed form (all entries are
polynomial); the test suite holds an independent quadrature oracle.
The CR basis on a triangle is ``phi_i = 1 - 2*lambda_i`` attached to the
edge opposite vertex ``i``, so its trace on a boundary edge involves all
three local dofs, and N is assembled per boundary *triangle*.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import DegenerateGeometryError, InadmissibleMeshError
from .mesh import check_admissibility

__all__ = [
    "DofMap",
    "SparseSymMatrix",
    "local_cr_M",
    "local_cr_N",
    "local_p1_M",
    "local_p1_N",
    "assemble",
    "write_matrix_coordinate",
]

_AREA_TOL = 1e-14


@dataclass(frozen=True)
class DofMap:
    """Local-to-global dof map for one element kind.

    ``cell_dofs[t, i]`` is the global dof of local dof ``i`` on triangle
    ``t`` (CR: edge opposite vertex ``i``; P1: vertex ``i``).
    ``boundary_support`` are the global dofs whose N-row is nonzero: all
    three edge dofs of every boundary triangle for CR, the boundary
    vertices for P1.
    """

    kind: str
    dof_count: int
    cell_dofs: np.ndarray
    boundary_support: np.ndarray


class SparseSymMatrix:
    """Symmetric sparse matrix stored as upper-triangle coordinates.

    Finalized on construction: duplicates summed, coordinates sorted
    lexicographically by (row, col), exact zeros dropped. The finalize
    order is deterministic, so repeated assembly is bit-reproducible.
    """

    def __init__(self, dim, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.shape != cols.shape or rows.shape != vals.shape:
            raise ValueError("triplet arrays must have equal length")
        if rows.size and (min(rows.min(), cols.min()) < 0
                          or max(rows.max(), cols.max()) >= dim):
            raise ValueError("triplet index out of range")
        r = np.minimum(rows, cols)
        c = np.maximum(rows, cols)
        order = np.lexsort((c, r))
        r, c, v = r[order], c[order], vals[order]
        if r.size:
            new_group = np.empty(r.size, dtype=bool)
            new_group[0] = True
            new_group[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
            starts = np.flatnonzero(new_group)
            v = np.add.reduceat(v, starts)
            r, c = r[starts], c[starts]
            keep = v != 0.0
            r, c, v = r[keep], c[keep], v[keep]
        self.dim = int(dim)
        self.row = r
        self.col = c
        self.val = v
        for a in (self.row, self.col, self.val):
            a.flags.writeable = False
        self._csr = None

    @property
    def nnz_upper(self):
        return len(self.val)

    def tocsr(self):
        """Full symmetric scipy CSR matrix (both triangles)."""
        if self._csr is None:
            off = self.row != self.col
            r = np.concatenate([self.row, self.col[off]])
            c = np.concatenate([self.col, self.row[off]])
            v = np.concatenate([self.val, self.val[off]])
            self._csr = sp.csr_matrix((v, (r, c)), shape=(self.dim, self.dim))
        return self._csr

    def toarray(self):
        return self.tocsr().toarray()

    def matvec(self, x):
        return self.tocsr() @ x

    def diagonal(self):
        return self.tocsr().diagonal()

    def support(self):
        """Indices of rows with at least one stored entry."""
        return np.unique(np.concatenate([self.row, self.col]))


# ---------------------------------------------------------------------------
# local matrices (closed form, single element)
# ---------------------------------------------------------------------------

def _edge_vectors(coords):
    coords = np.asarray(coords, dtype=np.float64)
    if coords.shape != (3, 2):
        raise ValueError("expected triangle coordinates of shape (3, 2)")
    e = np.empty((3, 2))
    e[0] = coords[2] - coords[1]
    e[1] = coords[0] - coords[2]
    e[2] = coords[1] - coords[0]
    area = 0.5 * float(e[2, 0] * (-e[1, 1]) - e[2, 1] * (-e[1, 0]))
    if area <= _AREA_TOL:
        raise DegenerateGeometryError(f"degenerate triangle, signed area {area:.3e}")
    return e, area


def local_cr_M(coords):
    """Local CR gradient+mass matrix, 3x3, dof ``i`` on the edge opposite
    vertex ``i``. Gradient part ``(e_i . e_j)/|K|``, mass part
    ``diag(|K|/3)``."""
    e, area = _edge_vectors(coords)
    return e @ e.T / area + np.eye(3) * (area / 3.0)


def local_cr_N(coords, edge):
    """Local CR boundary-trace mass matrix for one boundary edge, 3x3 in
    local dof order.

    Parameters
    ----------
    coords : array, shape (3, 2)
        Triangle vertex coordinates.
    edge : pair of int
        The boundary edge as two *local* vertex indices out of
        ``{0, 1, 2}``; raises ValueError for anything that is not an
        edge of the triangle.

    The dof on the edge (the one opposite the remaining vertex) traces
    to the constant 1, the other two dofs trace to ``2s - 1`` and
    ``1 - 2s`` in the arc-length parameter, giving ``|e|`` at the edge
    dof and the ``|e|/3`` block with alternating sign on the others.
    """
    a, b = edge
    if not {a, b} < {0, 1, 2} or a == b:
        raise ValueError(f"{edge!r} is not an edge of the triangle")
    coords = np.asarray(coords, dtype=np.float64)
    _edge_vectors(coords)  # degeneracy check
    opp = 3 - a - b
    length = float(np.hypot(*(coords[b] - coords[a])))
    return length * _kernels._CR_EDGE_TEMPLATES[opp]


def local_p1_M(coords):
    """Local P1 gradient+mass matrix, 3x3, dof ``i`` on vertex ``i``."""
    e, area = _edge_vectors(coords)
    mass = np.full((3, 3), area / 12.0)
    np.fill_diagonal(mass, area / 6.0)
    return e @ e.T / (4.0 * area) + mass


def local_p1_N(edge_len):
    """Local P1 edge mass matrix ``|e|/6 * [[2, 1], [1, 2]]``."""
    if edge_len < 0:
        raise ValueError("edge length must be nonnegative")
    return edge_len * _kernels._P1_EDGE_TEMPLATE


# ---------------------------------------------------------------------------
# global assembly
# ---------------------------------------------------------------------------

def _scatter_blocks(dim, cell_dofs, blocks):
    # feed only the local upper triangle: the store keeps one entry per
    # unordered pair, so the mirrored local entry would double-count
    n_loc = cell_dofs.shape[1]
    iu, ju = np.triu_indices(n_loc)
    rows = cell_dofs[:, iu].ravel()
    cols = cell_dofs[:, ju].ravel()
    vals = blocks[:, iu, ju].ravel()
    return SparseSymMatrix(dim, rows, cols, vals)


def assemble(mesh, kind):
    """Assemble (M, N, dofs) for the requested element kind.

    Parameters
    ----------
    mesh : Mesh
        Must pass :func:`check_admissibility`; otherwise
        :class:`InadmissibleMeshError` is raised carrying the report.
    kind : {'CR', 'P1'}

    Returns
    -------
    M : SparseSymMatrix
        Gradient+mass Gram matrix (symmetric positive definite).
    N : SparseSymMatrix
        Boundary-trace mass matrix (symmetric positive semidefinite,
        support exactly ``dofs.boundary_support``).
    dofs : DofMap
    """
    if kind not in ("CR", "P1"):
        raise ValueError(f"unknown element kind {kind!r}")
    report = check_admissibility(mesh)
    if not report.admissible:
        raise InadmissibleMeshError(report)

    area, _, elen = _kernels.tri_geometry(mesh.points, mesh.triangles)
    b_pairs = mesh.boundary_triangle_edges()
    b_tri = np.array([t for t, _ in b_pairs], dtype=np.int64)
    b_loc = np.array([l for _, l in b_pairs], dtype=np.int64)

    if kind == "CR":
        dim = mesh.num_edges
        cell_dofs = mesh.tri_edges
        m_blocks = _kernels.cr_m_blocks(mesh.points, mesh.triangles, area)
        M = _scatter_blocks(dim, cell_dofs, m_blocks)

        b_len = elen[b_tri, b_loc]
        n_blocks = _kernels.cr_n_blocks(b_len, b_loc)
        N = _scatter_blocks(dim, cell_dofs[b_tri], n_blocks)
        support = np.unique(cell_dofs[b_tri].ravel())
    else:
        dim = mesh.num_vertices
        cell_dofs = mesh.triangles
        m_blocks = _kernels.p1_m_blocks(mesh.points, mesh.triangles, area)
        M = _scatter_blocks(dim, cell_dofs, m_blocks)

        # boundary edge endpoints are the two vertices that are not the
        # opposite one
        ends = np.empty((len(b_tri), 2), dtype=np.int64)
        for r, (t, l) in enumerate(b_pairs):
            ends[r, 0] = mesh.triangles[t, (l + 1) % 3]
            ends[r, 1] = mesh.triangles[t, (l + 2) % 3]
        b_len = elen[b_tri, b_loc]
        n_blocks = _kernels.p1_n_blocks(b_len)
        N = _scatter_blocks(dim, ends, n_blocks)
        support = np.unique(ends.ravel())

    dofs = DofMap(kind=kind, dof_count=dim, cell_dofs=cell_dofs,
                  boundary_support=support)
    support.flags.writeable = False
    return M, N, dofs


def write_matrix_coordinate(mat, path):
    """Dump a SparseSymMatrix in the coordinate text format: first line
    the dimension, then ``row col value`` for the upper triangle."""
    with open(path, "w", encoding="ascii") as f:
        f.write(f"{mat.dim}\n")
        for r, c, v in zip(mat.row, mat.col, mat.val):
            f.write(f"{r} {c} {v:.17g}\n")

"""Triangulations of the unit square and the L-shaped domain.

Provides mesh generation, admissibility checking (conformity, positive
areas, at most one boundary edge per triangle), per-element geometry
(longest edge ``h_K``, area ``|K|``, boundary height ``H_K = 2|K|/|e|``)
and text-format serialization.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateGeometryError, MeshFormatError

__all__ = [
    "Mesh",
    "GeometryTable",
    "AdmissibilityReport",
    "generate_uniform_square",
    "generate_graded_lshape",
    "compute_geometry",
    "check_admissibility",
    "read_mesh",
    "write_mesh",
    "DOMAIN_AREAS",
    "DOMAIN_PERIMETERS",
]

DOMAIN_AREAS = {"square": 1.0, "lshape": 3.0}
DOMAIN_PERIMETERS = {"square": 4.0, "lshape": 8.0}

_AREA_TOL = 1e-14          # absolute positivity tolerance for signed areas
_MIN_ANGLE_DEG = 10.0      # floor for generated meshes

# local edge i is opposite local vertex i
_LOCAL_EDGES = ((1, 2), (2, 0), (0, 1))


class Mesh:
    """A conforming triangulation with a derived edge table.

    Parameters
    ----------
    points : array, shape (nv, 2)
        Vertex coordinates.
    triangles : array, shape (nt, 3)
        Vertex index triples, counter-clockwise.
    domain_tag : str
        One of ``square``, ``lshape``, ``external``.

    The constructor derives the edge table: ``edges`` holds sorted vertex
    pairs, ``edge_tris`` the one or two incident triangles (-1 marks the
    missing second one), ``boundary_edges`` the mask of edges with exactly
    one incident triangle, and ``tri_edges[t, i]`` the global index of the
    edge opposite local vertex ``i``. All arrays are frozen after
    construction; instances are safe to share between threads.
    """

    def __init__(self, points, triangles, domain_tag="external"):
        points = np.ascontiguousarray(points, dtype=np.float64)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("points must have shape (nv, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (nt, 3)")
        if not np.all(np.isfinite(points)):
            raise ValueError("vertex coordinates must be finite")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(points)):
            raise ValueError("triangle vertex index out of range")
        if domain_tag not in ("square", "lshape", "external"):
            raise ValueError(f"unknown domain_tag {domain_tag!r}")

        self.points = points
        self.triangles = triangles
        self.domain_tag = domain_tag
        self._build_edge_table()
        for a in (self.points, self.triangles, self.edges, self.edge_tris,
                  self.boundary_edges, self.tri_edges):
            a.flags.writeable = False

    def _build_edge_table(self):
        nt = len(self.triangles)
        pairs = np.empty((3 * nt, 2), dtype=np.int64)
        for i, (a, b) in enumerate(_LOCAL_EDGES):
            pairs[i::3, 0] = self.triangles[:, a]
            pairs[i::3, 1] = self.triangles[:, b]
        pairs.sort(axis=1)
        edges, inverse, counts = np.unique(
            pairs, axis=0, return_inverse=True, return_counts=True)
        self.edges = edges
        self.tri_edges = inverse.reshape(nt, 3)
        self.edge_incidence = counts
        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        # deterministic fill: ascending triangle index per edge (stable
        # sort groups the local edges by global edge, in triangle order)
        order = np.argsort(inverse, kind="stable")
        e_sorted = inverse[order]
        group_start = np.repeat(np.cumsum(counts) - counts, counts)
        slot = np.arange(len(e_sorted)) - group_start
        keep = slot < 2  # ignore excess incidences (flagged by the checker)
        edge_tris[e_sorted[keep], slot[keep]] = order[keep] // 3
        self.edge_tris = edge_tris
        self.boundary_edges = counts == 1

    @property
    def num_vertices(self):
        return len(self.points)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_boundary_edges(self):
        return int(self.boundary_edges.sum())

    def signed_areas(self):
        area, _, _ = _kernels.tri_geometry(self.points, self.triangles)
        return area

    def boundary_triangle_edges(self):
        """Pairs (triangle index, local edge index) for all boundary edges."""
        out = []
        b_edges = np.flatnonzero(self.boundary_edges)
        for e in b_edges:
            t = self.edge_tris[e, 0]
            loc = int(np.flatnonzero(self.tri_edges[t] == e)[0])
            out.append((int(t), loc))
        return out

    def __repr__(self):
        return (f"Mesh(domain={self.domain_tag}, nv={self.num_vertices}, "
                f"nt={self.num_triangles}, ne={self.num_edges})")


@dataclass(frozen=True)
class GeometryTable:
    """Per-element geometry feeding the bound constant.

    ``h_k[t]`` is the longest edge of triangle ``t``, ``area[t]`` its
    area, and ``height_boundary[t]`` the height over the boundary edge
    (NaN for interior triangles; for a triangle with several boundary
    edges the smallest height is kept, which is the conservative choice).
    """

    h_k: np.ndarray
    area: np.ndarray
    height_boundary: np.ndarray
    boundary_triangles: np.ndarray
    max_hk_all: float
    max_hk_over_sqrt_height: float


@dataclass
class AdmissibilityReport:
    """Result of :func:`check_admissibility`.

    ``admissible`` is True iff the mesh is conforming, every triangle has
    at most one boundary edge, and all signed areas are positive. The
    remaining fields list the offending triangle indices per category.
    """

    admissible: bool
    conforming: bool
    multi_boundary_triangles: list = field(default_factory=list)
    nonpositive_area_triangles: list = field(default_factory=list)
    nonconforming_triangles: list = field(default_factory=list)
    messages: list = field(default_factory=list)

    def summary(self):
        if self.admissible:
            return "admissible"
        parts = []
        if self.nonconforming_triangles:
            parts.append(f"nonconforming near triangles {self.nonconforming_triangles}")
        if self.multi_boundary_triangles:
            parts.append(
                f"triangles with more than one boundary edge {self.multi_boundary_triangles}")
        if self.nonpositive_area_triangles:
            parts.append(f"nonpositive areas {self.nonpositive_area_triangles}")
        return "; ".join(parts) or "inadmissible"


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _split_cell(ll, lr, ur, ul, flip):
    """Two CCW triangles for a lattice cell; '/' split by default,
    '\\' split (diagonal ll-ur) when flip is set."""
    if flip:
        return (ll, lr, ur), (ll, ur, ul)
    return (ll, lr, ul), (lr, ur, ul)


def generate_uniform_square(n):
    """Uniform right-triangle mesh of the unit square with lattice
    spacing ``1/n``.

    Diagonals follow a quadrant pinwheel: '\\' in the lower-left and
    upper-right quadrants, '/' in the other two. Every cell diagonal
    then points at the nearest domain corner, so each boundary triangle
    carries exactly one boundary edge for ``n >= 2`` (``n = 1``
    generates, but fails :func:`check_admissibility`), and for even
    ``n`` the triangulation is invariant under quarter turns, which
    keeps the degenerate eigenvalue pairs of the square numerically
    degenerate.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    side = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(side, side)
    points = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    half = 0.5 * n
    tris = []
    for cy in range(n):
        for cx in range(n):
            ll = vid(cx, cy)
            lr = vid(cx + 1, cy)
            ur = vid(cx + 1, cy + 1)
            ul = vid(cx, cy + 1)
            flip = (cx < half) == (cy < half)
            tris.extend(_split_cell(ll, lr, ur, ul, flip))
    return Mesh(points, np.array(tris, dtype=np.int64), domain_tag="square")


def generate_graded_lshape(n0, grading=3.0):
    """Graded triangulation of the L-shaped domain
    ``(0,2)x(0,2) \\ [1,2]x[1,2]``.

    Parameters
    ----------
    n0 : int
        Cells per unit length of the underlying structured mesh
        (``6*n0**2`` triangles). Must be at least 2.
    grading : float
        Grading exponent ``g >= 1``: element sizes follow
        ``h_K = O(max(r, h_min)**(1/g))`` with ``r`` the distance to the
        re-entrant corner at (1, 1). ``grading=1`` yields the
        quasi-uniform structured mesh.

    The grading is realized by the radial map ``r -> r**beta`` with
    ``beta = g/(g-1)`` applied in the max-norm centered at the re-entrant
    corner; the outer boundary is the max-norm unit sphere around (1, 1)
    and therefore stays fixed, while the notch edges map onto themselves.
    Raises :class:`DegenerateGeometryError` if the mapped mesh violates
    the 10-degree minimum-angle floor.
    """
    if n0 < 2:
        raise ValueError("n0 must be at least 2")
    if grading < 1.0:
        raise ValueError("grading exponent must be >= 1")

    m = 2 * n0
    side = np.linspace(0.0, 2.0, m + 1)
    xx, yy = np.meshgrid(side, side)
    points = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (m + 1) + i

    # corner cells whose two boundary edges meet at a convex corner the
    # '/' diagonal misses: (0,0), (2,1) and (1,2)
    flips = {(0, 0), (m - 1, n0 - 1), (n0 - 1, m - 1)}
    tris = []
    for cy in range(m):
        for cx in range(m):
            if cx >= n0 and cy >= n0:
                continue  # removed quadrant
            ll = vid(cx, cy)
            lr = vid(cx + 1, cy)
            ur = vid(cx + 1, cy + 1)
            ul = vid(cx, cy + 1)
            tris.extend(_split_cell(ll, lr, ur, ul, (cx, cy) in flips))
    tris = np.array(tris, dtype=np.int64)

    # drop unused lattice vertices (the removed quadrant interior)
    used = np.zeros(len(points), dtype=bool)
    used[tris.ravel()] = True
    remap = np.cumsum(used) - 1
    points = points[used]
    tris = remap[tris]

    if grading > 1.0:
        beta = grading / (grading - 1.0)
        d = points - np.array([1.0, 1.0])
        r = np.maximum(np.abs(d[:, 0]), np.abs(d[:, 1]))
        scale = np.ones_like(r)
        pos = r > 0
        scale[pos] = r[pos] ** (beta - 1.0)
        points = np.array([1.0, 1.0]) + scale[:, None] * d

    mesh = Mesh(points, tris, domain_tag="lshape")
    _enforce_quality(mesh)
    return mesh


def _enforce_quality(mesh):
    area, _, elen = _kernels.tri_geometry(mesh.points, mesh.triangles)
    if area.size == 0:
        return
    if area.min() <= _AREA_TOL:
        raise DegenerateGeometryError(
            f"triangle {int(area.argmin())} has nonpositive area {area.min():.3e}")
    min_angle = math.degrees(_min_angle(area, elen))
    if min_angle < _MIN_ANGLE_DEG:
        raise DegenerateGeometryError(
            f"minimum angle {min_angle:.2f} deg below the "
            f"{_MIN_ANGLE_DEG:.0f} deg floor")


def _min_angle(area, elen):
    # sin(angle at vertex i) = 2|K| / (b*c) with b, c the adjacent edges
    nt = len(area)
    sins = np.empty((nt, 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        sins[:, i] = 2.0 * area / (elen[:, j] * elen[:, k])
    # angles may be obtuse; the *minimum* angle is always acute, so the
    # smallest sine among the three corners identifies it
    return float(np.arcsin(np.clip(sins.min(), -1.0, 1.0)))


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def compute_geometry(mesh):
    """Per-element geometric quantities and the aggregates used by the
    bound constant.

    Returns a :class:`GeometryTable` with ``h_K``, ``|K|`` for all
    triangles, the height ``H_K = 2|K|/|e|`` over the boundary edge for
    boundary triangles, and the maxima ``max h_K`` and
    ``max h_K/sqrt(H_K)``. Raises :class:`DegenerateGeometryError` on
    (near-)zero areas.
    """
    area, h_k, elen = _kernels.tri_geometry(mesh.points, mesh.triangles)
    if area.size and area.min() <= _AREA_TOL:
        raise DegenerateGeometryError(
            f"triangle {int(area.argmin())} has nonpositive area {area.min():.3e}")

    height = np.full(len(area), np.nan)
    max_ratio = -np.inf
    b_tris = []
    for t, loc in mesh.boundary_triangle_edges():
        h = 2.0 * area[t] / elen[t, loc]
        # several boundary edges on one triangle: keep the smallest height
        height[t] = h if np.isnan(height[t]) else min(height[t], h)
        max_ratio = max(max_ratio, h_k[t] / math.sqrt(h))
        b_tris.append(t)
    b_tris = np.unique(np.array(b_tris, dtype=np.int64))

    table = GeometryTable(
        h_k=h_k,
        area=area,
        height_boundary=height,
        boundary_triangles=b_tris,
        max_hk_all=float(h_k.max()) if area.size else 0.0,
        max_hk_over_sqrt_height=float(max_ratio) if b_tris.size else float("nan"),
    )
    for a in (table.h_k, table.area, table.height_boundary, table.boundary_triangles):
        a.flags.writeable = False
    return table


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

def check_admissibility(mesh):
    """Validate the mesh against the assumptions of the bound formulas.

    Passes iff (i) the triangulation is conforming (every interior edge
    shared by exactly two triangles, no vertex hanging on an edge),
    (ii) every triangle has at most one boundary edge, and (iii) all
    signed areas are positive. Returns a structured
    :class:`AdmissibilityReport`; never raises.
    """
    report = AdmissibilityReport(admissible=True, conforming=True)

    area, _, _ = _kernels.tri_geometry(mesh.points, mesh.triangles)
    bad_area = np.flatnonzero(area <= _AREA_TOL)
    if bad_area.size:
        report.nonpositive_area_triangles = [int(t) for t in bad_area]
        report.messages.append(f"{bad_area.size} triangles with nonpositive area")

    # edges shared by more than two triangles
    over = np.flatnonzero(mesh.edge_incidence > 2)
    for e in over:
        report.conforming = False
        report.nonconforming_triangles.extend(
            int(t) for t in mesh.edge_tris[e] if t >= 0)
        report.messages.append(
            f"edge {tuple(mesh.edges[e])} shared by {int(mesh.edge_incidence[e])} triangles")

    # hanging vertices: a vertex lying strictly inside an edge that has
    # only one incident triangle (a genuinely interior edge facing a
    # refined neighbour shows up as two stacked 1-incidence edges)
    b_edge_ids = np.flatnonzero(mesh.boundary_edges)
    pts = mesh.points
    for e in b_edge_ids:
        a, b = mesh.edges[e]
        pa, pb = pts[a], pts[b]
        ab = pb - pa
        L2 = float(ab @ ab)
        if L2 == 0.0:
            continue
        t_param = ((pts - pa) @ ab) / L2
        proj = pa + np.outer(t_param, ab)
        dist2 = ((pts - proj) ** 2).sum(axis=1)
        eps = 1e-12 * L2
        inside = (dist2 < eps) & (t_param > 1e-9) & (t_param < 1.0 - 1e-9)
        inside[[a, b]] = False
        if inside.any():
            report.conforming = False
            tri = int(mesh.edge_tris[e, 0])
            report.nonconforming_triangles.append(tri)
            report.messages.append(
                f"vertex {int(np.flatnonzero(inside)[0])} hangs on edge {(int(a), int(b))}")

    # boundary-edge count per triangle
    b_count = np.zeros(mesh.num_triangles, dtype=np.int64)
    for t, _loc in mesh.boundary_triangle_edges():
        b_count[t] += 1
    multi = np.flatnonzero(b_count > 1)
    if multi.size:
        report.multi_boundary_triangles = [int(t) for t in multi]
        report.messages.append(f"{multi.size} triangles with more than one boundary edge")

    report.nonconforming_triangles = sorted(set(report.nonconforming_triangles))
    report.admissible = (report.conforming
                         and not report.multi_boundary_triangles
                         and not report.nonpositive_area_triangles)
    return report


# ---------------------------------------------------------------------------
# serialization (steklov-mesh v1)
# ---------------------------------------------------------------------------

def write_mesh(mesh, path):
    """Write the mesh in the steklov-mesh v1 text format."""
    with open(path, "w", encoding="ascii") as f:
        f.write("steklov-mesh 1\n")
        f.write(f"{mesh.num_vertices} {mesh.num_triangles}\n")
        for x, y in mesh.points:
            f.write(f"{x:.17g} {y:.17g}\n")
        for a, b, c in mesh.triangles:
            f.write(f"{a} {b} {c}\n")


def read_mesh(path):
    """Read a steklov-mesh v1 file.

    Lines starting with ``#`` are comments. Raises
    :class:`MeshFormatError` with the offending 1-based line number on a
    malformed header, out-of-range indices, or a non-positive triangle
    area. The returned mesh carries ``domain_tag='external'``; boundary
    edges are inferred from incidence.
    """
    with open(path, "r", encoding="ascii") as f:
        raw = f.readlines()

    lines = [(i + 1, s.strip()) for i, s in enumerate(raw)
             if s.strip() and not s.lstrip().startswith("#")]
    if not lines:
        raise MeshFormatError("empty mesh file", line=1)

    lno, header = lines[0]
    if header.split() != ["steklov-mesh", "1"]:
        raise MeshFormatError(f"bad header {header!r}, expected 'steklov-mesh 1'", line=lno)

    if len(lines) < 2:
        raise MeshFormatError("missing size line '<nv> <nt>'", line=lno)
    lno, size_line = lines[1]
    parts = size_line.split()
    if len(parts) != 2:
        raise MeshFormatError(f"bad size line {size_line!r}", line=lno)
    try:
        nv, nt = int(parts[0]), int(parts[1])
    except ValueError:
        raise MeshFormatError(f"bad size line {size_line!r}", line=lno) from None
    if nv < 3 or nt < 1:
        raise MeshFormatError(f"implausible sizes nv={nv} nt={nt}", line=lno)
    if len(lines) != 2 + nv + nt:
        raise MeshFormatError(
            f"expected {nv} vertex and {nt} triangle lines, found {len(lines) - 2}",
            line=lines[-1][0])

    points = np.empty((nv, 2))
    for r, (lno, text) in enumerate(lines[2:2 + nv]):
        parts = text.split()
        try:
            if len(parts) != 2:
                raise ValueError
            points[r] = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise MeshFormatError(f"bad vertex line {text!r}", line=lno) from None
        if not np.all(np.isfinite(points[r])):
            raise MeshFormatError(f"non-finite coordinates {text!r}", line=lno)

    tris = np.empty((nt, 3), dtype=np.int64)
    for r, (lno, text) in enumerate(lines[2 + nv:]):
        parts = text.split()
        try:
            if len(parts) != 3:
                raise ValueError
            tris[r] = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError(f"bad triangle line {text!r}", line=lno) from None
        a, b, c = tris[r]
        if len({a, b, c}) != 3:
            raise MeshFormatError(f"repeated vertex index in {text!r}", line=lno)
        if min(a, b, c) < 0 or max(a, b, c) >= nv:
            raise MeshFormatError(
                f"vertex index out of range in {text!r} (nv={nv})", line=lno)
        u = points[b] - points[a]
        v = points[c] - points[a]
        signed = 0.5 * float(u[0] * v[1] - u[1] * v[0])
        if signed <= _AREA_TOL:
            raise MeshFormatError(
                f"non-positive triangle area {signed:.3e} in {text!r}", line=lno)

    return Mesh(points, tris, domain_tag="external")

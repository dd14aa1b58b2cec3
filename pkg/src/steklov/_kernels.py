"""Batched per-element kernels used by mesh geometry and matrix assembly.

Every kernel exists in two functionally identical variants: a numba
``@njit`` loop version and a vectorized pure-numpy version. The numba
variant is used by default; set the environment variable
``STEKLOV_DISABLE_NUMBA=1`` (or uninstall numba) to select the numpy
path. ``benchmarks/bench_kernels.py`` compares the two.

Conventions: triangles are index triples ``(v0, v1, v2)`` in CCW order;
local edge ``i`` is the edge opposite vertex ``i``, with edge vectors
``e0 = p2 - p1``, ``e1 = p0 - p2``, ``e2 = p1 - p0``.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "IMPLEMENTATIONS",
    "tri_geometry",
    "cr_m_blocks",
    "p1_m_blocks",
    "cr_n_blocks",
    "p1_n_blocks",
]


# ---------------------------------------------------------------------------
# pure-numpy variants
# ---------------------------------------------------------------------------

def _tri_geometry_np(points, tris):
    """Signed areas, longest edge lengths and per-local-edge lengths.

    Returns ``(area, h_k, elen)`` with ``elen[t, i]`` the length of the
    edge opposite local vertex ``i`` of triangle ``t``.
    """
    p = points[tris]                      # (nt, 3, 2)
    e = np.empty_like(p)
    e[:, 0] = p[:, 2] - p[:, 1]
    e[:, 1] = p[:, 0] - p[:, 2]
    e[:, 2] = p[:, 1] - p[:, 0]
    area = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0]))
    elen = np.sqrt(e[:, :, 0] ** 2 + e[:, :, 1] ** 2)
    h_k = elen.max(axis=1)
    return area, h_k, elen


def _cr_m_blocks_np(points, tris, area):
    """Local CR matrices of the broken gradient+mass form, (nt, 3, 3).

    Gradient block is ``(e_i . e_j) / |K|`` (the CR basis is
    ``1 - 2*lambda_i``), mass block is ``diag(|K|/3)``.
    """
    p = points[tris]
    e = np.empty_like(p)
    e[:, 0] = p[:, 2] - p[:, 1]
    e[:, 1] = p[:, 0] - p[:, 2]
    e[:, 2] = p[:, 1] - p[:, 0]
    g = np.einsum("tid,tjd->tij", e, e) / area[:, None, None]
    g[:, np.arange(3), np.arange(3)] += area[:, None] / 3.0
    return g


def _p1_m_blocks_np(points, tris, area):
    """Local P1 matrices of the gradient+mass form, (nt, 3, 3)."""
    p = points[tris]
    e = np.empty_like(p)
    e[:, 0] = p[:, 2] - p[:, 1]
    e[:, 1] = p[:, 0] - p[:, 2]
    e[:, 2] = p[:, 1] - p[:, 0]
    g = np.einsum("tid,tjd->tij", e, e) / (4.0 * area[:, None, None])
    mass = np.full((3, 3), 1.0 / 12.0)
    mass[np.arange(3), np.arange(3)] = 1.0 / 6.0
    return g + area[:, None, None] * mass


# CR trace products on an edge of unit length, by local index of the
# boundary edge: the dof on the edge traces to 1, the other two to
# 2s - 1 and 1 - 2s.
_CR_EDGE_TEMPLATES = np.zeros((3, 3, 3))
for _l in range(3):
    _j, _k = [(1, 2), (2, 0), (0, 1)][_l]
    _CR_EDGE_TEMPLATES[_l, _l, _l] = 1.0
    _CR_EDGE_TEMPLATES[_l, _j, _j] = 1.0 / 3.0
    _CR_EDGE_TEMPLATES[_l, _k, _k] = 1.0 / 3.0
    _CR_EDGE_TEMPLATES[_l, _j, _k] = -1.0 / 3.0
    _CR_EDGE_TEMPLATES[_l, _k, _j] = -1.0 / 3.0
del _l, _j, _k

_P1_EDGE_TEMPLATE = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0


def _cr_n_blocks_np(edge_len, local_edge):
    """Local CR boundary-trace mass blocks, (nb, 3, 3) in local dof order.

    ``local_edge[b]`` is the local index of the boundary edge (= index of
    the opposite vertex), ``edge_len[b]`` its length.
    """
    return edge_len[:, None, None] * _CR_EDGE_TEMPLATES[local_edge]


def _p1_n_blocks_np(edge_len):
    """Local P1 boundary-edge mass blocks, (nb, 2, 2)."""
    return edge_len[:, None, None] * _P1_EDGE_TEMPLATE


_NUMPY_IMPL = {
    "tri_geometry": _tri_geometry_np,
    "cr_m_blocks": _cr_m_blocks_np,
    "p1_m_blocks": _p1_m_blocks_np,
    "cr_n_blocks": _cr_n_blocks_np,
    "p1_n_blocks": _p1_n_blocks_np,
}


# ---------------------------------------------------------------------------
# numba variants
# ---------------------------------------------------------------------------

def _build_numba_impl():
    from numba import njit

    @njit(cache=True)
    def tri_geometry_nb(points, tris):
        nt = tris.shape[0]
        area = np.empty(nt)
        h_k = np.empty(nt)
        elen = np.empty((nt, 3))
        for t in range(nt):
            x0 = points[tris[t, 0], 0]
            y0 = points[tris[t, 0], 1]
            x1 = points[tris[t, 1], 0]
            y1 = points[tris[t, 1], 1]
            x2 = points[tris[t, 2], 0]
            y2 = points[tris[t, 2], 1]
            area[t] = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
            elen[t, 0] = np.hypot(x2 - x1, y2 - y1)
            elen[t, 1] = np.hypot(x0 - x2, y0 - y2)
            elen[t, 2] = np.hypot(x1 - x0, y1 - y0)
            h_k[t] = max(elen[t, 0], max(elen[t, 1], elen[t, 2]))
        return area, h_k, elen

    @njit(cache=True)
    def cr_m_blocks_nb(points, tris, area):
        nt = tris.shape[0]
        out = np.zeros((nt, 3, 3))
        ex = np.empty(3)
        ey = np.empty(3)
        for t in range(nt):
            x0 = points[tris[t, 0], 0]
            y0 = points[tris[t, 0], 1]
            x1 = points[tris[t, 1], 0]
            y1 = points[tris[t, 1], 1]
            x2 = points[tris[t, 2], 0]
            y2 = points[tris[t, 2], 1]
            ex[0] = x2 - x1
            ey[0] = y2 - y1
            ex[1] = x0 - x2
            ey[1] = y0 - y2
            ex[2] = x1 - x0
            ey[2] = y1 - y0
            a = area[t]
            for i in range(3):
                for j in range(3):
                    out[t, i, j] = (ex[i] * ex[j] + ey[i] * ey[j]) / a
                out[t, i, i] += a / 3.0
        return out

    @njit(cache=True)
    def p1_m_blocks_nb(points, tris, area):
        nt = tris.shape[0]
        out = np.zeros((nt, 3, 3))
        ex = np.empty(3)
        ey = np.empty(3)
        for t in range(nt):
            x0 = points[tris[t, 0], 0]
            y0 = points[tris[t, 0], 1]
            x1 = points[tris[t, 1], 0]
            y1 = points[tris[t, 1], 1]
            x2 = points[tris[t, 2], 0]
            y2 = points[tris[t, 2], 1]
            ex[0] = x2 - x1
            ey[0] = y2 - y1
            ex[1] = x0 - x2
            ey[1] = y0 - y2
            ex[2] = x1 - x0
            ey[2] = y1 - y0
            a = area[t]
            for i in range(3):
                for j in range(3):
                    out[t, i, j] = (ex[i] * ex[j] + ey[i] * ey[j]) / (4.0 * a)
                    out[t, i, j] += a / 12.0
                out[t, i, i] += a / 12.0
        return out

    @njit(cache=True)
    def cr_n_blocks_nb(edge_len, local_edge):
        nb = edge_len.shape[0]
        out = np.zeros((nb, 3, 3))
        for b in range(nb):
            le = edge_len[b]
            l = local_edge[b]
            j = (l + 1) % 3
            k = (l + 2) % 3
            out[b, l, l] = le
            out[b, j, j] = le / 3.0
            out[b, k, k] = le / 3.0
            out[b, j, k] = -le / 3.0
            out[b, k, j] = -le / 3.0
        return out

    @njit(cache=True)
    def p1_n_blocks_nb(edge_len):
        nb = edge_len.shape[0]
        out = np.empty((nb, 2, 2))
        for b in range(nb):
            le = edge_len[b]
            out[b, 0, 0] = le / 3.0
            out[b, 1, 1] = le / 3.0
            out[b, 0, 1] = le / 6.0
            out[b, 1, 0] = le / 6.0
        return out

    return {
        "tri_geometry": tri_geometry_nb,
        "cr_m_blocks": cr_m_blocks_nb,
        "p1_m_blocks": p1_m_blocks_nb,
        "cr_n_blocks": cr_n_blocks_nb,
        "p1_n_blocks": p1_n_blocks_nb,
    }


def _env_disables_numba():
    return os.environ.get("STEKLOV_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")


IMPLEMENTATIONS = {"numpy": _NUMPY_IMPL, "numba": None}

if not _env_disables_numba():
    try:
        IMPLEMENTATIONS["numba"] = _build_numba_impl()
        BACKEND = "numba"
    except ImportError:
        BACKEND = "numpy"
else:
    BACKEND = "numpy"

_ACTIVE = IMPLEMENTATIONS[BACKEND] or _NUMPY_IMPL

tri_geometry = _ACTIVE["tri_geometry"]
cr_m_blocks = _ACTIVE["cr_m_blocks"]
p1_m_blocks = _ACTIVE["p1_m_blocks"]
cr_n_blocks = _ACTIVE["cr_n_blocks"]
p1_n_blocks = _ACTIVE["p1_n_blocks"]

"""Independent numerical oracles for the test suite.

Deliberately avoids the closed forms used in production: basis functions
are built by solving their defining nodal systems (edge-midpoint values
for CR, vertex values for P1), element integrals use a degree-5 triangle
quadrature, edge integrals a 4-point Gauss rule, and the pencil oracle
forms B^-1 A densely and takes its eigenvalues.
"""

import numpy as np

# degree-5 rule on the reference triangle (7 points), weights sum to 1
_TRI_PTS = np.array([
    [1 / 3, 1 / 3],
    [0.0597158717897698, 0.4701420641051151],
    [0.4701420641051151, 0.0597158717897698],
    [0.4701420641051151, 0.4701420641051151],
    [0.7974269853530873, 0.1012865073234563],
    [0.1012865073234563, 0.7974269853530873],
    [0.1012865073234563, 0.1012865073234563],
])
_TRI_WTS = np.array([
    0.225,
    0.1323941527885062, 0.1323941527885062, 0.1323941527885062,
    0.1259391805448271, 0.1259391805448271, 0.1259391805448271,
])

# 4-point Gauss-Legendre on [0, 1]
_EDGE_PTS = 0.5 * (1.0 + np.array([
    -0.8611363115940526, -0.3399810435848563,
    0.3399810435848563, 0.8611363115940526,
]))
_EDGE_WTS = 0.5 * np.array([
    0.3478548451374538, 0.6521451548625461,
    0.6521451548625461, 0.3478548451374538,
])


def _affine_basis(nodes):
    """Coefficients (a, b, c) of the linear functions a + b x + c y that
    take value delta_ij at the given three nodes."""
    A = np.column_stack([np.ones(3), nodes[:, 0], nodes[:, 1]])
    return np.linalg.solve(A, np.eye(3))  # column j = basis j


def cr_basis_coefficients(coords):
    """CR basis from its definition: linear, edge-midpoint values
    delta_ij with midpoint i on the edge opposite vertex i."""
    mids = np.array([
        0.5 * (coords[1] + coords[2]),
        0.5 * (coords[2] + coords[0]),
        0.5 * (coords[0] + coords[1]),
    ])
    return _affine_basis(mids)


def p1_basis_coefficients(coords):
    return _affine_basis(np.asarray(coords, dtype=float))


def _tri_quad_points(coords):
    v0, v1, v2 = coords
    pts = (v0[None, :]
           + _TRI_PTS[:, :1] * (v1 - v0)[None, :]
           + _TRI_PTS[:, 1:] * (v2 - v0)[None, :])
    d1, d2 = v1 - v0, v2 - v0
    area = 0.5 * abs(d1[0] * d2[1] - d1[1] * d2[0])
    return pts, _TRI_WTS * area


def quad_local_gram(coords, basis_coef):
    """3x3 matrix of integral(grad phi_i . grad phi_j + phi_i phi_j) by
    quadrature, for linear basis functions given by coefficient columns."""
    coords = np.asarray(coords, dtype=float)
    pts, wts = _tri_quad_points(coords)
    vals = basis_coef[0][None, :] + pts @ basis_coef[1:]      # (nq, 3)
    grads = basis_coef[1:]                                    # (2, 3) constant
    out = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = np.sum(wts * vals[:, i] * vals[:, j])
            out[i, j] += wts.sum() * (grads[:, i] @ grads[:, j])
    return out


def quad_edge_mass(coords, basis_coef, a, b):
    """Matrix of integral over the segment coords[a]-coords[b] of
    phi_i phi_j ds by Gauss quadrature."""
    coords = np.asarray(coords, dtype=float)
    pa, pb = coords[a], coords[b]
    length = np.hypot(*(pb - pa))
    pts = pa[None, :] + _EDGE_PTS[:, None] * (pb - pa)[None, :]
    vals = basis_coef[0][None, :] + pts @ basis_coef[1:]
    n = basis_coef.shape[1]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = length * np.sum(_EDGE_WTS * vals[:, i] * vals[:, j])
    return out


def dense_nonzero_mu(A, B, rel_cut=1e-10):
    """Nonzero eigenvalues of the pencil A x = mu B x, descending, via
    the explicit dense B^-1 A eigendecomposition."""
    mu = np.linalg.eigvals(np.linalg.solve(B, A))
    mu = np.sort(np.real(mu))[::-1]
    cut = rel_cut * max(mu[0], 0.0)
    return mu[mu > cut]


def random_triangle(rng, min_area=0.05):
    """Non-degenerate CCW triangle with O(1) coordinates."""
    while True:
        coords = rng.uniform(-1.0, 1.0, size=(3, 2))
        d1, d2 = coords[1] - coords[0], coords[2] - coords[0]
        area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
        if area < 0:
            coords = coords[[0, 2, 1]]
            area = -area
        if area > min_area:
            return coords

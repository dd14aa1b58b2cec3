"""Generalized eigensolver for the pencil N u = mu M u.

N vanishes off the boundary-trace support, so the nonzero spectrum is
preserved exactly by eliminating the interior block of M (Schur
complement / static condensation): every nonzero mu of (N, M) is an
eigenvalue of ``N_bb x = mu * S x`` with ``S = M_bb - M_bi M_ii^-1 M_ib``
and conversely. Discrete Steklov eigenvalues are the reciprocals
``lambda = 1/mu``.

Certification is a Weyl-type residual enclosure: for symmetric A and
SPD B, some pencil eigenvalue lies within
``|mu - rho| <= ||A x - rho B x|| / (floor(B) * ||x||)`` where
``floor(B)`` is the Gershgorin lower bound for ``lambda_min(B)``. The
residual itself is evaluated in floating point, so the enclosure is
quasi-rigorous rather than fully verified; it also locates *some*
eigenvalue near rho, which for clustered eigenvalues leaves the index
attribution to the computed ordering.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .assembly import SparseSymMatrix
from .errors import CertificationUnavailable, SolverFailure

__all__ = [
    "Pencil",
    "Spectrum",
    "Enclosure",
    "SchurReduction",
    "gershgorin_floor",
    "schur_reduce",
    "solve_pencil_largest",
    "to_lambda",
    "certify",
    "write_spectrum_csv",
]

_INTERIOR_SOLVE_RTOL = 1e-12
_KERNEL_CUT_REL = 1e-10


@dataclass(frozen=True)
class Pencil:
    """Symmetric pencil A x = mu B x with A supported on ``boundary_support``.

    Here A is the PSD trace matrix N and B the SPD Gram matrix M.
    """

    A: SparseSymMatrix
    B: SparseSymMatrix
    boundary_support: np.ndarray

    def __post_init__(self):
        if self.A.dim != self.B.dim:
            raise ValueError("pencil matrices must have equal dimensions")


@dataclass(frozen=True)
class Spectrum:
    """Computed nonzero pencil eigenvalues, descending, with full-space
    B-orthonormal coefficient vectors as columns of ``vectors``."""

    mu: np.ndarray
    vectors: np.ndarray
    kernel_cut: float


@dataclass(frozen=True)
class Enclosure:
    """Residual enclosure |mu - center| <= radius for some pencil
    eigenvalue mu, with the derived interval for lambda = 1/mu."""

    center: float
    radius: float

    @property
    def mu_interval(self):
        return (self.center - self.radius, self.center + self.radius)

    @property
    def lambda_interval(self):
        """(lower, upper) for lambda = 1/mu; None unless center - radius > 0."""
        if self.center - self.radius <= 0.0:
            return None
        return (1.0 / (self.center + self.radius),
                1.0 / (self.center - self.radius))


class _Lifter:
    """Expands reduced boundary vectors to full-space vectors using the
    precomputed interior solution block X = B_ii^-1 B_ib."""

    def __init__(self, dim, b_set, interior, x_block):
        self.dim = dim
        self.b_set = b_set
        self.interior = interior
        self.x_block = x_block

    def expand(self, vecs_b):
        vecs_b = np.atleast_2d(vecs_b.T).T  # (nb, k)
        out = np.zeros((self.dim, vecs_b.shape[1]))
        out[self.b_set] = vecs_b
        if self.interior.size:
            out[self.interior] = -(self.x_block @ vecs_b)
        return out


@dataclass(frozen=True)
class SchurReduction:
    """Boundary Schur complement of a pencil: dense ``S`` and ``A_bb``
    over ``b_set``, plus the lift back to full-space vectors."""

    S: np.ndarray
    A_bb: np.ndarray
    b_set: np.ndarray
    lift: _Lifter


def gershgorin_floor(B):
    """min_i (B_ii - sum_{j != i} |B_ij|), a lower bound for the smallest
    eigenvalue of B whenever it is positive."""
    csr = B.tocsr()
    diag = csr.diagonal()
    abs_row = np.asarray(abs(csr).sum(axis=1)).ravel()
    return float((2.0 * diag - abs_row).min())


def schur_reduce(pencil):
    """Eliminate the dofs outside the support of A.

    Returns a :class:`SchurReduction` with ``S = B_bb - B_bi B_ii^-1 B_ib``
    (dense SPD), ``A_bb`` the restriction of A, and the interior lift.
    The multi-right-hand-side interior solve is done with a sparse LU
    factorization and validated against the 1e-12 relative residual
    contract, with a conjugate-gradient retry per failing column;
    :class:`SolverFailure` reports the achieved residual otherwise.
    """
    b_set = np.asarray(pencil.boundary_support, dtype=np.int64)
    dim = pencil.B.dim
    a_csr = pencil.A.tocsr()

    # the reduction is exact only because A vanishes off b_set
    mask = np.zeros(dim, dtype=bool)
    mask[b_set] = True
    stray = ~mask[pencil.A.row] | ~mask[pencil.A.col]
    if stray.any():
        raise ValueError("A has entries outside boundary_support; "
                         "Schur reduction would not preserve the spectrum")

    interior = np.flatnonzero(~mask)
    b_csr = pencil.B.tocsr()
    B_bb = b_csr[np.ix_(b_set, b_set)].toarray()
    A_bb = a_csr[np.ix_(b_set, b_set)].toarray()
    A_bb = 0.5 * (A_bb + A_bb.T)

    if interior.size == 0:
        S = B_bb
        lift = _Lifter(dim, b_set, interior, None)
        return SchurReduction(S=S, A_bb=A_bb, b_set=b_set, lift=lift)

    B_ii = b_csr[np.ix_(interior, interior)].tocsc()
    B_ib = b_csr[np.ix_(interior, b_set)].tocsc()
    rhs = B_ib.toarray()
    try:
        lu = spla.splu(B_ii)
        X = lu.solve(rhs)
    except RuntimeError as err:
        raise SolverFailure(f"interior factorization failed: {err}") from err

    rhs_norm = np.linalg.norm(rhs)
    res = np.linalg.norm(B_ii @ X - rhs)
    rel = res / rhs_norm if rhs_norm > 0 else 0.0
    if rel > _INTERIOR_SOLVE_RTOL:
        X, rel = _cg_refine(B_ii, rhs, X, rhs_norm)
        if rel > _INTERIOR_SOLVE_RTOL:
            raise SolverFailure(
                f"interior solve reached relative residual {rel:.3e} "
                f"(contract {_INTERIOR_SOLVE_RTOL:.0e})", achieved=rel)

    S = B_bb - (B_ib.T @ X)
    S = 0.5 * (S + S.T)
    lift = _Lifter(dim, b_set, interior, X)
    return SchurReduction(S=S, A_bb=A_bb, b_set=b_set, lift=lift)


def _cg_refine(B_ii, rhs, X, rhs_norm):
    for j in range(rhs.shape[1]):
        col_res = np.linalg.norm(B_ii @ X[:, j] - rhs[:, j])
        col_norm = np.linalg.norm(rhs[:, j])
        if col_norm and col_res / col_norm > _INTERIOR_SOLVE_RTOL:
            x, _info = spla.cg(B_ii, rhs[:, j], x0=X[:, j],
                               rtol=_INTERIOR_SOLVE_RTOL, atol=0.0)
            X[:, j] = x
    rel = np.linalg.norm(B_ii @ X - rhs) / rhs_norm if rhs_norm > 0 else 0.0
    return X, rel


def solve_pencil_largest(A_bb, S, k, lift=None):
    """Largest k eigenvalues of the dense pencil A_bb x = mu S x.

    S must be SPD; the solve factors S = L L^T, forms
    L^-1 A_bb L^-T and runs the symmetric eigendecomposition
    (LAPACK sygvd via scipy), yielding S-orthonormal reduced vectors.
    With ``lift`` given (from :func:`schur_reduce`) the vectors are
    expanded to full space by the interior reconstruction
    ``x_i = -B_ii^-1 B_ib x_b``, which makes them B-orthonormal.

    Eigenvalues at or below the kernel cut ``1e-10 * mu_max`` count as
    kernel modes; requesting more than the available nonzero modes is a
    ValueError, a Cholesky breakdown of S a :class:`SolverFailure`.
    """
    A_sym = 0.5 * (A_bb + A_bb.T)
    S_sym = 0.5 * (S + S.T)
    if k < 1:
        raise ValueError("k must be at least 1")
    try:
        w, V = scipy.linalg.eigh(A_sym, S_sym)
    except scipy.linalg.LinAlgError as err:
        raise SolverFailure(f"dense pencil solve failed (S not SPD?): {err}") from err

    w = w[::-1]
    V = V[:, ::-1]
    mu_max = max(float(w[0]), 0.0)
    kernel_cut = _KERNEL_CUT_REL * mu_max
    available = int(np.count_nonzero(w > kernel_cut))
    if k > available:
        raise ValueError(
            f"requested {k} eigenvalues but only {available} lie above "
            f"the kernel cut {kernel_cut:.3e}")

    mu = np.array(w[:k])
    vecs = V[:, :k]
    if lift is not None:
        vecs = lift.expand(vecs)
    else:
        vecs = np.array(vecs)
    mu.flags.writeable = False
    vecs.flags.writeable = False
    return Spectrum(mu=mu, vectors=vecs, kernel_cut=kernel_cut)


def to_lambda(spectrum, k=None):
    """Discrete eigenvalues lambda_i = 1/mu_i, ascending.

    Requesting more values than the spectrum holds above its kernel cut
    is a ValueError (a kernel mode has no finite lambda).
    """
    if k is None:
        k = len(spectrum.mu)
    if k > len(spectrum.mu):
        raise ValueError(
            f"requested {k} eigenvalues but the spectrum holds "
            f"{len(spectrum.mu)} above the kernel cut (kernel mode "
            "requested as an eigenvalue)")
    mu = spectrum.mu[:k]
    if np.any(mu <= spectrum.kernel_cut):
        raise ValueError("kernel mode requested as an eigenvalue")
    return 1.0 / mu


def certify(pencil, rho, x):
    """Residual enclosure around the computed eigenvalue rho.

    ``radius = ||A x - rho B x||_2 / (gershgorin_floor(B) * ||x||_2)``
    guarantees, up to floating-point evaluation of the residual, that
    some eigenvalue of the pencil lies in [rho - radius, rho + radius].
    Raises :class:`CertificationUnavailable` when the Gershgorin floor
    is not positive (callers report and continue uncertified).
    """
    x = np.asarray(x, dtype=np.float64)
    xn = np.linalg.norm(x)
    if xn == 0.0:
        raise ValueError("certificate vector must be nonzero")
    floor = gershgorin_floor(pencil.B)
    if floor <= 0.0:
        raise CertificationUnavailable(
            f"Gershgorin floor of B is {floor:.3e}; residual certification "
            "unavailable on this mesh", floor=floor)
    residual = pencil.A.matvec(x) - rho * pencil.B.matvec(x)
    radius = float(np.linalg.norm(residual) / (floor * xn))
    return Enclosure(center=float(rho), radius=radius)


def write_spectrum_csv(spectrum, path, enclosures=None):
    """Dump ``index,mu,lambda,radius`` rows; radius is empty without
    certification."""
    with open(path, "w", encoding="ascii") as f:
        f.write("index,mu,lambda,radius\n")
        for i, mu in enumerate(spectrum.mu):
            radius = "" if enclosures is None else f"{enclosures[i].radius:.17g}"
            f.write(f"{i + 1},{mu:.17g},{1.0 / mu:.17g},{radius}\n")

"""Guaranteed two-sided Steklov eigenvalue bounds.

The lower-bound route: assemble the Crouzeix-Raviart pencil, solve for
the leading discrete eigenvalues lambda_h, form the projection-error
constant

    C_h = 0.6711 * max_{boundary K} h_K / sqrt(H_K)
        + (0.1893 / sqrt(lambda_h1)) * max_K h_K

and map each lambda_h through ``lambda_h / (1 + C_h^2 * lambda_h)``,
which bounds the corresponding continuous eigenvalue from below. The
upper-bound route is the conforming P1 discretization, whose Rayleigh-
Ritz values bound from above. In certified runs, residual enclosures
replace the raw values on the guaranteed side of every step.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble
from .eigensolve import (Pencil, certify, schur_reduce, solve_pencil_largest,
                         to_lambda)
from .errors import CertificationUnavailable
from .mesh import compute_geometry

__all__ = [
    "Constants",
    "DEFAULT_CONSTANTS",
    "SQUARE_REFERENCE",
    "LSHAPE_REFERENCE",
    "BoundsReport",
    "RateTable",
    "compute_Ch",
    "lower_bound_map",
    "compute_bounds",
    "convergence_rates",
    "render_markdown",
    "render_csv",
]

# High-resolution reference eigenvalues used only for error/rate
# reporting, never inside a bound.
SQUARE_REFERENCE = (0.240079, 1.492293, 1.492293, 2.082616, 4.733516)
LSHAPE_REFERENCE = (0.34141, 0.61686, 0.98427, 1.69206, 1.70092)

_CERTIFY_PAD = 1e-12  # relative upward pad on the two C_h terms


@dataclass(frozen=True)
class Constants:
    """Constants of the projection error estimate.

    ``c_interp`` bounds the interpolation error ``||u - I_h u||_0,K <=
    c_interp * h_K * |u - I_h u|_1,K`` on a triangle; ``c_trace`` the
    edge-trace variant with ``h_K/sqrt(H_K)`` scaling. Consistency
    requires ``c_trace >= sqrt(2 * (c_interp**2 + c_interp))`` with the
    rounding upward (the safe direction for a lower bound).
    """

    c_interp: float = 0.1893
    c_trace: float = 0.6711

    def __post_init__(self):
        if self.c_trace < math.sqrt(2.0 * (self.c_interp ** 2 + self.c_interp)):
            raise ValueError("c_trace is inconsistent with c_interp "
                             "(rounded in the unsafe direction)")


DEFAULT_CONSTANTS = Constants()


def compute_Ch(geometry, lambda_h1_lower, constants=DEFAULT_CONSTANTS,
               certify_pad=False):
    """Projection-error constant C_h from mesh geometry and a lower
    estimate of the first discrete eigenvalue.

    Parameters
    ----------
    geometry : GeometryTable
    lambda_h1_lower : float
        Positive lower estimate of lambda_h1 (use the enclosure lower
        end in certified runs). Shrinking it only increases C_h, which
        keeps the bound direction safe.
    certify_pad : bool
        Pad both max terms upward by one ulp-scale relative unit.
    """
    if not lambda_h1_lower > 0.0:
        raise ValueError("lambda_h1_lower must be positive")
    ratio = geometry.max_hk_over_sqrt_height
    if not np.isfinite(ratio):
        raise ValueError("geometry table has no boundary triangles; "
                         "C_h needs boundary geometry")
    t1 = constants.c_trace * ratio
    t2 = constants.c_interp / math.sqrt(lambda_h1_lower) * geometry.max_hk_all
    if certify_pad:
        t1 *= 1.0 + _CERTIFY_PAD
        t2 *= 1.0 + _CERTIFY_PAD
    return t1 + t2


def lower_bound_map(lambda_h, c_h):
    """Map a discrete eigenvalue to its guaranteed lower bound
    ``lambda_h / (1 + c_h**2 * lambda_h)``.

    Strictly increasing in ``lambda_h`` and strictly decreasing in
    ``c_h``, so feeding smaller (safer) discrete values never raises the
    result.
    """
    if lambda_h < 0.0:
        raise ValueError("lambda_h must be nonnegative")
    return lambda_h / (1.0 + c_h * c_h * lambda_h)


@dataclass
class BoundsReport:
    """Two-sided bounds on one mesh: per-index rows
    ``lower_i <= lambda_i <= upper_i`` with the raw CR value
    ``lambda_h_i``, plus the constant C_h and mesh descriptors."""

    domain_tag: str
    label: str
    h: float
    n_elements: int
    c_h: float
    certified: bool
    rigor_note: str
    lower: np.ndarray
    lambda_h: np.ndarray
    upper: np.ndarray
    err_lower: float = None
    err_upper: float = None
    sigma_lower: float = None
    sigma_upper: float = None

    @property
    def k(self):
        return len(self.lower)


@dataclass
class RateTable:
    """Total errors against reference values and their decay rates
    between consecutive (halved) mesh levels."""

    reference: tuple
    err_lower: list = field(default_factory=list)
    err_upper: list = field(default_factory=list)
    sigma_lower: list = field(default_factory=list)  # None for the first level
    sigma_upper: list = field(default_factory=list)


def _certified_lambdas(pencil, spectrum, side):
    """Per-mode safe lambda values from residual enclosures.

    side='lower': lambda lower ends 1/(mu + radius) for the CR route;
    side='upper': lambda upper ends 1/(mu - radius) for the P1 route.
    Raises CertificationUnavailable (propagated) when the floor fails.
    """
    out = np.empty(len(spectrum.mu))
    for i, mu in enumerate(spectrum.mu):
        enc = certify(pencil, mu, spectrum.vectors[:, i])
        if side == "lower":
            out[i] = 1.0 / (enc.center + enc.radius)
        else:
            if enc.center - enc.radius <= 0.0:
                raise CertificationUnavailable(
                    f"enclosure for mu={mu:.3e} crosses zero; no finite "
                    "upper end for lambda")
            out[i] = 1.0 / (enc.center - enc.radius)
    return out


def _solve_kind(mesh, kind, k):
    M, N, dofs = assemble(mesh, kind)
    pencil = Pencil(A=N, B=M, boundary_support=dofs.boundary_support)
    red = schur_reduce(pencil)
    spectrum = solve_pencil_largest(red.A_bb, red.S, k, lift=red.lift)
    return pencil, spectrum


def compute_bounds(mesh, k=5, certified=True, constants=DEFAULT_CONSTANTS,
                   label=None, h=None):
    """Run the full two-sided bound pipeline on one admissible mesh.

    CR pencil -> leading k discrete eigenvalues -> (optional) residual
    enclosures -> C_h from the lower end of lambda_h1 -> lower bounds;
    P1 pencil -> upper bounds. When certification is unavailable (the
    Gershgorin floor of M is not positive, which happens on meshes with
    strongly obtuse triangles) the report falls back to raw eigenvalues
    and says so in ``rigor_note``.
    """
    geometry = compute_geometry(mesh)
    cr_pencil, cr_spectrum = _solve_kind(mesh, "CR", k)
    lambda_cr = to_lambda(cr_spectrum, k)

    p1_pencil, p1_spectrum = _solve_kind(mesh, "P1", k)
    lambda_p1 = to_lambda(p1_spectrum, k)

    lambda_safe_low = lambda_cr
    lambda_safe_up = lambda_p1
    if certified:
        problems = []
        try:
            lambda_safe_low = _certified_lambdas(cr_pencil, cr_spectrum, "lower")
        except CertificationUnavailable as err:
            problems.append(f"lower route: {err}")
        try:
            lambda_safe_up = _certified_lambdas(p1_pencil, p1_spectrum, "upper")
        except CertificationUnavailable as err:
            problems.append(f"upper route: {err}")
        is_certified = not problems
        if is_certified:
            note = ("residual enclosures, quasi-rigorous "
                    "(floating-point residual evaluation)")
        else:
            note = ("certification unavailable ("
                    + "; ".join(problems) + "); raw eigenvalues used there")
    else:
        is_certified = False
        note = "raw eigenvalues (certification not requested)"

    c_h = compute_Ch(geometry, lambda_safe_low[0], constants,
                     certify_pad=is_certified)
    lower = np.array([lower_bound_map(lam, c_h) for lam in lambda_safe_low])

    if h is None:
        h = geometry.max_hk_all
    if label is None:
        label = f"{mesh.domain_tag}, {mesh.num_triangles} elements"
    return BoundsReport(
        domain_tag=mesh.domain_tag,
        label=label,
        h=float(h),
        n_elements=mesh.num_triangles,
        c_h=float(c_h),
        certified=is_certified,
        rigor_note=note,
        lower=lower,
        lambda_h=np.array(lambda_cr),
        upper=np.array(lambda_safe_up),
    )


def convergence_rates(reports, reference):
    """Total errors and decay rates across a halving sequence of meshes.

    ``Err(h) = sum_i |ref_i - bound_i|`` over the first five indices;
    the rate between consecutive levels is ``log2(Err(h) / Err(h/2))``.
    Results are also written back into the per-level reports.
    """
    reference = tuple(reference)
    if not reports:
        raise ValueError("need at least one report")
    for rep in reports:
        if rep.k != len(reference):
            raise ValueError(
                f"report {rep.label!r} holds {rep.k} bounds, reference "
                f"holds {len(reference)}")
    table = RateTable(reference=reference)
    for i, rep in enumerate(reports):
        err_low = float(sum(abs(r - b) for r, b in zip(reference, rep.lower)))
        err_up = float(sum(abs(r - b) for r, b in zip(reference, rep.upper)))
        table.err_lower.append(err_low)
        table.err_upper.append(err_up)
        if i == 0:
            table.sigma_lower.append(None)
            table.sigma_upper.append(None)
        else:
            table.sigma_lower.append(math.log2(table.err_lower[i - 1] / err_low))
            table.sigma_upper.append(math.log2(table.err_upper[i - 1] / err_up))
        rep.err_lower = err_low
        rep.err_upper = err_up
        rep.sigma_lower = table.sigma_lower[i]
        rep.sigma_upper = table.sigma_upper[i]
    return table


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _fmt(x, digits):
    return f"{x:.{digits}g}"


def render_markdown(reports, rates=None, digits=6):
    """Markdown table with one column per mesh level: C_h row, interval
    rows per eigenvalue index, then error-rate rows when given."""
    k = reports[0].k
    head = ["quantity"] + [rep.label for rep in reports]
    lines = ["| " + " | ".join(head) + " |",
             "|" + "---|" * len(head)]
    lines.append("| C_h | " + " | ".join(_fmt(r.c_h, digits) for r in reports) + " |")
    for i in range(k):
        cells = [f"({_fmt(r.lower[i], digits)}, {_fmt(r.upper[i], digits)})"
                 for r in reports]
        lines.append(f"| lambda_{i + 1} | " + " | ".join(cells) + " |")
    if rates is not None:
        for name, vals in (("sigma_lower", rates.sigma_lower),
                           ("sigma_upper", rates.sigma_upper)):
            cells = ["-" if v is None else _fmt(v, digits) for v in vals]
            lines.append(f"| {name} | " + " | ".join(cells) + " |")
    notes = sorted({r.rigor_note for r in reports})
    lines.append("")
    for n in notes:
        lines.append(f"certification: {n}")
    return "\n".join(lines) + "\n"


def render_csv(reports, digits=17):
    """CSV rows ``h,i,lower,lambda_h,upper,Ch`` across all levels."""
    lines = ["h,i,lower,lambda_h,upper,Ch"]
    for rep in reports:
        for i in range(rep.k):
            lines.append(",".join([
                _fmt(rep.h, digits),
                str(i + 1),
                _fmt(rep.lower[i], digits),
                _fmt(rep.lambda_h[i], digits),
                _fmt(rep.upper[i], digits),
                _fmt(rep.c_h, digits),
            ]))
    return "\n".join(lines) + "\n"

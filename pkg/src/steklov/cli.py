"""Command-line front end.

Subcommands:

* ``square``     two-sided bound tables on uniform unit-square meshes
* ``lshape``     bounds on a graded mesh of the L-shaped domain
* ``mesh-info``  counts and admissibility of a mesh file
* ``bound-file`` bounds on an externally supplied mesh

Exit codes: 0 success, 1 invalid input or mesh, 2 solver failure.
``STEKLOV_THREADS`` caps how many mesh levels run concurrently.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .bounds import (LSHAPE_REFERENCE, SQUARE_REFERENCE, compute_bounds,
                     convergence_rates, render_csv, render_markdown)
from .errors import SolverFailure, SteklovError
from .mesh import (check_admissibility, compute_geometry,
                   generate_graded_lshape, generate_uniform_square, read_mesh)


class _Parser(argparse.ArgumentParser):
    # invalid arguments are an input error: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--k", type=int, default=5, help="number of eigenvalues (default 5)")
    p.add_argument("--certify", action=argparse.BooleanOptionalAction, default=True,
                   help="use residual enclosures on the guaranteed side")
    p.add_argument("--format", choices=("md", "csv"), default="md", dest="fmt")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--digits", type=int, default=None,
                   help="significant digits in the output "
                        "(default 6 for md, 12 for csv)")
    p.add_argument("--reference", default=None,
                   help="comma-separated reference eigenvalues for error rates")


def build_parser():
    p = _Parser(prog="steklov",
                description="Guaranteed two-sided bounds for Steklov eigenvalues")
    sub = p.add_subparsers(dest="command", required=True)

    sq = sub.add_parser("square", parents=[], help="uniform unit-square experiment")
    sq.add_argument("--n", type=int, nargs="+", required=True,
                    help="lattice subdivisions per side, e.g. --n 8 16 32 64")
    _add_common(sq)

    ls = sub.add_parser("lshape", help="graded L-shape experiment")
    ls.add_argument("--grading", type=float, default=3.0,
                    help="grading exponent g: h_K = O(r^(1/g)) (default 3)")
    ls.add_argument("--target-elems", type=int, default=5000,
                    help="approximate element count (default 5000)")
    ls.add_argument("--n0", type=int, default=None,
                    help="cells per unit length; overrides --target-elems")
    _add_common(ls)

    mi = sub.add_parser("mesh-info", help="inspect a steklov-mesh v1 file")
    mi.add_argument("--file", required=True)

    bf = sub.add_parser("bound-file", help="bound eigenvalues on an external mesh")
    bf.add_argument("--file", required=True)
    _add_common(bf)
    return p


def _parse_reference(text, k):
    vals = tuple(float(v) for v in text.split(","))
    if len(vals) != k:
        raise ValueError(f"--reference needs {k} comma-separated values")
    return vals


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="ascii") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _max_workers(n_jobs):
    cap = int(os.environ.get("STEKLOV_THREADS", "1") or "1")
    return max(1, min(cap, n_jobs))


def _render(reports, rates, args):
    if args.fmt == "csv":
        return render_csv(reports, digits=args.digits or 12)
    return render_markdown(reports, rates=rates, digits=args.digits or 6)


def _run_square(args):
    if any(n < 2 for n in args.n):
        raise ValueError("square meshes need --n values >= 2")
    if args.k < 1:
        raise ValueError("--k must be at least 1")

    def level(n):
        mesh = generate_uniform_square(n)
        return compute_bounds(mesh, k=args.k, certified=args.certify,
                              label=f"h=1/{n}", h=1.0 / n)

    with ThreadPoolExecutor(max_workers=_max_workers(len(args.n))) as pool:
        reports = list(pool.map(level, args.n))

    rates = None
    reference = SQUARE_REFERENCE if args.reference is None else \
        _parse_reference(args.reference, args.k)
    if len(reference) == args.k and len(reports) > 1:
        rates = convergence_rates(reports, reference)
    _emit(_render(reports, rates, args), args.out)
    return 0


def _run_lshape(args):
    if args.n0 is not None:
        n0 = args.n0
    else:
        n0 = max(2, round((args.target_elems / 6.0) ** 0.5))
    mesh = generate_graded_lshape(n0, grading=args.grading)
    report = compute_bounds(mesh, k=args.k, certified=args.certify,
                            label=f"{mesh.num_triangles} elements")
    reports = [report]
    # single level: total errors are attached to the report, but decay
    # rates need a refinement sequence, so no sigma rows are rendered
    reference = LSHAPE_REFERENCE if args.reference is None else \
        _parse_reference(args.reference, args.k)
    if len(reference) == args.k:
        convergence_rates(reports, reference)
    _emit(_render(reports, None, args), args.out)
    return 0


def _run_mesh_info(args):
    mesh = read_mesh(args.file)
    report = check_admissibility(mesh)
    lines = [f"steklov-mesh: domain={mesh.domain_tag}",
             f"{mesh.num_vertices} vertices",
             f"{mesh.num_triangles} triangles, {mesh.num_edges} edges, "
             f"{mesh.num_boundary_edges} boundary, "
             f"admissible: {'yes' if report.admissible else 'no'}"]
    if not report.admissible:
        lines.append(f"violations: {report.summary()}")
    else:
        geo = compute_geometry(mesh)
        lines.append(f"max h_K = {geo.max_hk_all:.6g}, "
                     f"max h_K/sqrt(H_K) = {geo.max_hk_over_sqrt_height:.6g}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _run_bound_file(args):
    mesh = read_mesh(args.file)
    report = compute_bounds(mesh, k=args.k, certified=args.certify,
                            label=f"{os.path.basename(args.file)} "
                                  f"({mesh.num_triangles} elements)")
    reports = [report]
    rates = None
    if args.reference is not None:
        rates = convergence_rates(reports, _parse_reference(args.reference, args.k))
    _emit(_render(reports, rates, args), args.out)
    return 0


_RUNNERS = {
    "square": _run_square,
    "lshape": _run_lshape,
    "mesh-info": _run_mesh_info,
    "bound-file": _run_bound_file,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code or 0
    try:
        return _RUNNERS[args.command](args)
    except SolverFailure as err:
        print(f"steklov: solver failure: {err}", file=sys.stderr)
        return 2
    except (SteklovError, ValueError, OSError) as err:
        print(f"steklov: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark the numba kernels against the pure-numpy fallback.

Times the per-element geometry and local-matrix kernels on a large
uniform square mesh, plus one full assembly per backend. Run as

    python benchmarks/bench_kernels.py [--n 256] [--repeat 7]

The active backend of the installed package is controlled by the
STEKLOV_DISABLE_NUMBA environment variable; this script times both
implementations directly regardless of that flag.
"""

import argparse
import time

import numpy as np

from steklov import _kernels
from steklov.mesh import generate_uniform_square


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=256, help="square subdivisions per side")
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()

    mesh = generate_uniform_square(args.n)
    pts, tris = mesh.points, mesh.triangles
    area, _, elen = _kernels.IMPLEMENTATIONS["numpy"]["tri_geometry"](pts, tris)
    b_pairs = mesh.boundary_triangle_edges()
    b_tri = np.array([t for t, _ in b_pairs])
    b_loc = np.array([l for _, l in b_pairs])
    b_len = elen[b_tri, b_loc]

    print(f"mesh: {mesh.num_triangles} triangles, {len(b_pairs)} boundary edges")
    if _kernels.IMPLEMENTATIONS["numba"] is None:
        print("numba implementation unavailable; timing numpy only")

    cases = {
        "tri_geometry": lambda impl: impl["tri_geometry"](pts, tris),
        "cr_m_blocks": lambda impl: impl["cr_m_blocks"](pts, tris, area),
        "p1_m_blocks": lambda impl: impl["p1_m_blocks"](pts, tris, area),
        "cr_n_blocks": lambda impl: impl["cr_n_blocks"](b_len, b_loc),
    }

    header = f"{'kernel':14s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, runner in cases.items():
        row = {"numpy": float("nan"), "numba": float("nan")}
        for backend, impl in _kernels.IMPLEMENTATIONS.items():
            if impl is None:
                continue
            runner(impl)  # warm up (JIT compile)
            row[backend] = _time(lambda: runner(impl), args.repeat)
        speed = row["numpy"] / row["numba"] if row["numba"] == row["numba"] else float("nan")
        print(f"{name:14s} {row['numpy'] * 1e3:12.3f} {row['numba'] * 1e3:12.3f} {speed:8.2f}x")


if __name__ == "__main__":
    main()

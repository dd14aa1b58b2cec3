import os
import subprocess
import sys

import numpy as np
import pytest

from steklov import _kernels
from steklov.mesh import generate_graded_lshape, generate_uniform_square

NUMBA_AVAILABLE = _kernels.IMPLEMENTATIONS["numba"] is not None


def _mesh_inputs():
    for mesh in (generate_uniform_square(6), generate_graded_lshape(4, 3.0)):
        area, _, elen = _kernels._tri_geometry_np(mesh.points, mesh.triangles)
        pairs = mesh.boundary_triangle_edges()
        b_tri = np.array([t for t, _ in pairs])
        b_loc = np.array([l for _, l in pairs])
        yield mesh, area, elen[b_tri, b_loc], b_loc


@pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba unavailable or disabled")
class TestBackendAgreement:
    def test_tri_geometry(self):
        nb = _kernels.IMPLEMENTATIONS["numba"]
        for mesh, *_ in _mesh_inputs():
            a1, h1, e1 = _kernels._tri_geometry_np(mesh.points, mesh.triangles)
            a2, h2, e2 = nb["tri_geometry"](mesh.points, mesh.triangles)
            assert np.allclose(a1, a2, rtol=1e-15, atol=0)
            assert np.allclose(h1, h2, rtol=1e-15, atol=0)
            assert np.allclose(e1, e2, rtol=1e-15, atol=0)

    def test_m_blocks(self):
        nb = _kernels.IMPLEMENTATIONS["numba"]
        for mesh, area, *_ in _mesh_inputs():
            for name in ("cr_m_blocks", "p1_m_blocks"):
                b1 = _kernels._NUMPY_IMPL[name](mesh.points, mesh.triangles, area)
                b2 = nb[name](mesh.points, mesh.triangles, area)
                assert np.allclose(b1, b2, rtol=1e-14, atol=1e-15)

    def test_n_blocks(self):
        nb = _kernels.IMPLEMENTATIONS["numba"]
        for _mesh, _area, b_len, b_loc in _mesh_inputs():
            assert np.allclose(_kernels._cr_n_blocks_np(b_len, b_loc),
                               nb["cr_n_blocks"](b_len, b_loc), atol=0)
            assert np.allclose(_kernels._p1_n_blocks_np(b_len),
                               nb["p1_n_blocks"](b_len), atol=0)


class TestBackendSelection:
    def test_active_backend_consistent(self):
        assert _kernels.BACKEND in ("numba", "numpy")
        active = _kernels.IMPLEMENTATIONS[_kernels.BACKEND] or _kernels._NUMPY_IMPL
        assert _kernels.tri_geometry is active["tri_geometry"]

    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, STEKLOV_DISABLE_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c",
             "from steklov import _kernels; print(_kernels.BACKEND)"],
            capture_output=True, text=True, env=env, check=True)
        assert out.stdout.strip() == "numpy"

    def test_numpy_path_matches_active_backend(self):
        from steklov.bounds import compute_bounds
        here = compute_bounds(generate_uniform_square(4), k=3).lower[0]
        env = dict(os.environ, STEKLOV_DISABLE_NUMBA="1")
        code = (
            "from steklov.mesh import generate_uniform_square\n"
            "from steklov.bounds import compute_bounds\n"
            "r = compute_bounds(generate_uniform_square(4), k=3)\n"
            "print(f'{r.lower[0]:.15f}')\n"
        )
        out = subprocess.run([sys.executable, "-c", code],
                             capture_output=True, text=True, env=env, check=True)
        assert out.stdout.strip() == f"{here:.15f}"

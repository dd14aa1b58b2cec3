import os
import subprocess
import sys

import pytest

from steklov.cli import main
from steklov.errors import SolverFailure
from steklov.mesh import generate_uniform_square, write_mesh


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "steklov.cli", *args],
                          capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def mesh_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("meshes") / "m8.txt"
    write_mesh(generate_uniform_square(8), path)
    return str(path)


class TestSquare:
    def test_markdown_table_layout(self):
        out = run_cli(["square", "--n", "8", "--k", "5", "--digits", "4"])
        assert out.returncode == 0
        assert "| C_h | 0.4038 |" in out.stdout
        assert "| lambda_1 | (0.2311, 0.2402) |" in out.stdout
        assert "| lambda_5 |" in out.stdout

    def test_sigma_rows_for_level_sequence(self):
        out = run_cli(["square", "--n", "8", "16", "--k", "5", "--digits", "3"])
        assert out.returncode == 0
        assert "| sigma_lower | - | 0.829 |" in out.stdout
        assert "| sigma_upper | - |" in out.stdout

    def test_csv_matches_reference_column(self):
        out = run_cli(["square", "--n", "8", "--k", "5", "--format", "csv"])
        assert out.returncode == 0
        lines = out.stdout.strip().splitlines()
        assert lines[0] == "h,i,lower,lambda_h,upper,Ch"
        rows = [line.split(",") for line in lines[1:]]
        paper = [(0.231, 0.241), (1.195, 1.503), (1.195, 1.503),
                 (1.541, 2.148), (2.570, 4.897)]
        for row, (lo, up) in zip(rows, paper):
            assert abs(float(row[2]) - lo) <= 1e-3
            assert abs(float(row[4]) - up) <= 1e-3
            assert abs(float(row[5]) - 0.4039) <= 2e-4

    def test_deterministic_output(self):
        a = run_cli(["square", "--n", "4", "--k", "3", "--format", "csv"])
        b = run_cli(["square", "--n", "4", "--k", "3", "--format", "csv"])
        assert a.stdout == b.stdout

    def test_threaded_levels_identical(self):
        a = run_cli(["square", "--n", "4", "8", "--k", "3"])
        b = run_cli(["square", "--n", "4", "8", "--k", "3"],
                    env_extra={"STEKLOV_THREADS": "2"})
        assert a.stdout == b.stdout

    def test_invalid_n_exit_1(self):
        out = run_cli(["square", "--n", "1", "--k", "5"])
        assert out.returncode == 1
        assert "error" in out.stderr

    def test_reference_override(self):
        out = run_cli(["square", "--n", "8", "16", "--k", "5", "--reference",
                       "0.2401,1.4923,1.4923,2.0826,4.7335"])
        assert out.returncode == 0
        assert "sigma_lower" in out.stdout

    def test_bad_reference_count(self):
        out = run_cli(["square", "--n", "8", "--k", "5", "--reference", "1,2"])
        assert out.returncode == 1

    def test_out_file(self, tmp_path):
        path = tmp_path / "table.md"
        out = run_cli(["square", "--n", "4", "--k", "2", "--out", str(path)])
        assert out.returncode == 0
        assert out.stdout == ""
        assert "| C_h |" in path.read_text()


class TestLshape:
    def test_small_run(self):
        out = run_cli(["lshape", "--n0", "6", "--grading", "3", "--k", "3",
                       "--digits", "5"])
        assert out.returncode == 0
        assert "216 elements" in out.stdout
        assert "certification" in out.stdout

    def test_target_elems(self):
        out = run_cli(["lshape", "--target-elems", "600", "--k", "2",
                       "--format", "csv"])
        assert out.returncode == 0
        # 6*n0^2 with n0 = round(sqrt(600/6)) = 10
        assert len(out.stdout.strip().splitlines()) == 3


class TestMeshInfo:
    def test_counts_line(self, mesh_file):
        out = run_cli(["mesh-info", "--file", mesh_file])
        assert out.returncode == 0
        assert "128 triangles, 208 edges, 32 boundary, admissible: yes" in out.stdout

    def test_missing_file_exit_1(self):
        out = run_cli(["mesh-info", "--file", "/nonexistent/m.txt"])
        assert out.returncode == 1

    def test_parse_error_with_line_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("steklov-mesh 1\n3 1\n0 0\n1 0\n0 1\n0 1 9\n")
        out = run_cli(["mesh-info", "--file", str(path)])
        assert out.returncode == 1
        assert "line 6" in out.stderr

    def test_inadmissible_mesh_reported_not_failed(self, tmp_path):
        path = tmp_path / "n1.txt"
        write_mesh(generate_uniform_square(1), path)
        out = run_cli(["mesh-info", "--file", str(path)])
        assert out.returncode == 0
        assert "admissible: no" in out.stdout


class TestBoundFile:
    def test_bounds_on_external_mesh(self, mesh_file):
        out = run_cli(["bound-file", "--file", mesh_file, "--k", "5",
                       "--format", "csv"])
        assert out.returncode == 0
        rows = out.stdout.strip().splitlines()[1:]
        assert abs(float(rows[0].split(",")[2]) - 0.231) <= 1e-3

    def test_inadmissible_mesh_exit_1(self, tmp_path):
        path = tmp_path / "n1.txt"
        write_mesh(generate_uniform_square(1), path)
        out = run_cli(["bound-file", "--file", str(path), "--k", "2"])
        assert out.returncode == 1


class TestExitCodes:
    def test_no_command_exit_1(self):
        out = run_cli([])
        assert out.returncode == 1

    def test_solver_failure_exit_2(self, monkeypatch, mesh_file):
        import steklov.cli as cli_mod

        def boom(*a, **k):
            raise SolverFailure("synthetic breakdown")

        monkeypatch.setattr(cli_mod, "compute_bounds", boom)
        assert main(["bound-file", "--file", mesh_file, "--k", "2"]) == 2

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from steklov.bounds import compute_bounds
from steklov.mesh import generate_graded_lshape, generate_uniform_square

SQUARE_LEVELS = (8, 16, 32, 64)


@pytest.fixture(scope="session")
def square_reports():
    """Certified bound reports for the four table mesh sizes."""
    reports = []
    for n in SQUARE_LEVELS:
        mesh = generate_uniform_square(n)
        reports.append(compute_bounds(mesh, k=5, certified=True,
                                      label=f"h=1/{n}", h=1.0 / n))
    return reports


@pytest.fixture(scope="session")
def square_reports_raw():
    reports = []
    for n in SQUARE_LEVELS:
        mesh = generate_uniform_square(n)
        reports.append(compute_bounds(mesh, k=5, certified=False,
                                      label=f"h=1/{n}", h=1.0 / n))
    return reports


@pytest.fixture(scope="session")
def lshape_report():
    """Bounds on the graded L-shape at the reference scale (~5000 elements)."""
    mesh = generate_graded_lshape(29, grading=3.0)
    return compute_bounds(mesh, k=5, certified=True), mesh

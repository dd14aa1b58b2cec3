"""Guaranteed two-sided bounds for Steklov eigenvalues on polygonal
domains: nonconforming (Crouzeix-Raviart) lower bounds through an
explicit projection-error constant, conforming P1 upper bounds, and
quasi-rigorous residual certification."""

from .assembly import (DofMap, SparseSymMatrix, assemble, local_cr_M,
                       local_cr_N, local_p1_M, local_p1_N,
                       write_matrix_coordinate)
from .bounds import (LSHAPE_REFERENCE, SQUARE_REFERENCE, BoundsReport,
                     Constants, RateTable, compute_bounds, compute_Ch,
                     convergence_rates, lower_bound_map, render_csv,
                     render_markdown)
from .eigensolve import (Enclosure, Pencil, SchurReduction, Spectrum, certify,
                         gershgorin_floor, schur_reduce, solve_pencil_largest,
                         to_lambda, write_spectrum_csv)
from .errors import (CertificationUnavailable, DegenerateGeometryError,
                     InadmissibleMeshError, MeshFormatError, SolverFailure,
                     SteklovError)
from .mesh import (AdmissibilityReport, GeometryTable, Mesh,
                   check_admissibility, compute_geometry,
                   generate_graded_lshape, generate_uniform_square, read_mesh,
                   write_mesh)

__version__ = "0.1.0"

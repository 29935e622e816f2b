"""saddle-forge: construction and numerical verification of singly periodic
genus-two saddle towers from explicit Weierstrass data."""

from .errors import (BranchInconsistency, ContourTooClose, DegeneratePoint,
                     DomainViolation, GaussMapPole, InvalidResolution,
                     NoConvergence, NoRoot, NotApplicable, PathThroughBranchPoint,
                     PoleAtEnd, SaddleForgeError, SeedBoxExhausted, WeldMismatch)
from .params import SurfaceParams, SymFuncs, from_family, sym_funcs
from .quad import QuadratureSpec, contour_integral, integrate_singular, \
    integrate_to_infinity
from .weier import CurvePoint, WeierstrassValue, curve_rhs, dh_eval, g_eval, \
    phi_eval, phi_vec, rotated_data, vertical_normal_points, w_closed, w_eval
from .periods import (FamilySolution, PeriodReport, F_eval, I_integral,
                      J_integral, K_integral, period_report, residue_R,
                      residue_r, solve_periods, solve_y, sweep_family,
                      write_sweep_csv)
from .mesh import (AssembledMesh, DomainGrid, PieceMesh, assemble, build_grid,
                   curvature_stats, edge_increments, export_obj,
                   integrate_piece, mean_curvature_norm)
from .verify import (VerificationReport, case_diagnostics, check_injectivity,
                     check_profile_bell, check_self_intersections,
                     check_symmetry_table, degree_diagnostic)

__version__ = "0.1.0"

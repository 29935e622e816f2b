import dataclasses

import numpy as np
import pytest

import saddle_forge.verify as verify
from saddle_forge.errors import ContourTooClose, NotApplicable
from saddle_forge.mesh import assemble
from saddle_forge.params import SurfaceParams, sym_funcs
from saddle_forge.verify import (SYMMETRY_TABLE, case_diagnostics,
                                 check_injectivity, check_profile_bell,
                                 check_self_intersections,
                                 check_symmetry_table, degree_diagnostic)

P0 = SurfaceParams(a=0.5, b=2.0, x=0.3, X=0.5, y=1.5)


# --------------------------------------------------------- symmetry table

def test_symmetry_table_holds_generic():
    rep = check_symmetry_table(P0, tol=1e-9)
    assert rep.passed, [r for r in rep.results if not r.passed]


def test_symmetry_table_holds_at_solution(solved_params):
    rep = check_symmetry_table(solved_params, tol=1e-9)
    assert rep.passed


def test_symmetry_table_negative_control(monkeypatch):
    # flipping one constraint in the table must make the check fail
    broken = dict(SYMMETRY_TABLE)
    (gk, gs), dh_spec = broken["AL"]
    broken["AL"] = (("im", gs), dh_spec)  # AL carries real g, claim imaginary
    monkeypatch.setattr(verify, "SYMMETRY_TABLE", broken)
    rep = check_symmetry_table(P0, tol=1e-9)
    assert not rep.passed


# ------------------------------------------------------- degree diagnostic

def test_gauss_map_degree_is_five(solved_params):
    out = degree_diagnostic(solved_params)
    assert out["degree"] == 5
    assert out["total"] + 4*out["interior_vertical_points"] == 5
    assert len(out["windings"]) == 8


def test_gauss_map_degree_is_five_generic():
    assert degree_diagnostic(P0)["degree"] == 5


def test_degree_rejects_probe_on_boundary_values():
    # g = 1 is attained on the contour (top of the imaginary axis)
    with pytest.raises(ContourTooClose):
        degree_diagnostic(P0, probe=1.0 + 0.0j)


# ------------------------------------------------------------ injectivity

def test_injectivity_passes_on_piece(piece64):
    res = check_injectivity(piece64.vertices, n_pairs=100_000)
    assert res.passed
    assert res.value == 0


def test_injectivity_negative_control(piece64):
    # duplicating a small vertex set guarantees sampled collisions
    v = np.tile(piece64.vertices[:50], (2, 1))
    res = check_injectivity(v, n_pairs=100_000)
    assert not res.passed
    assert res.value > 0


# ------------------------------------------------------ self-intersection

def _tri_mesh(tris):
    verts = np.array([q for t in tris for q in t], float)
    faces = np.arange(len(verts)).reshape(-1, 3)
    return verts, faces


def test_self_intersection_detects_crossing_pair():
    v, f = _tri_mesh([
        [(0, 0, 0), (2, 0, 0), (0, 2, 0)],
        [(0.5, 0.5, -1), (1.0, 0.5, 1), (0.5, 1.0, 1)],
    ])
    res = check_self_intersections(v, f)
    assert not res.passed
    assert res.value == 1


def test_self_intersection_ignores_disjoint_and_touching():
    v, f = _tri_mesh([
        [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
        [(5, 5, 5), (6, 5, 5), (5, 6, 5)],        # far away
        [(0, 0, 1e-3), (1, 0, 1e-3), (0, 1, 1e-3)],  # parallel, no crossing
    ])
    res = check_self_intersections(v, f)
    assert res.passed


def test_self_intersection_excludes_shared_vertex_neighbours(piece64):
    # a folded fan shares vertices; such pairs are seam neighbours, not hits
    v, f = _tri_mesh([[(0, 0, 0), (1, 0, 0), (0, 1, 0)]])
    v = np.vstack([v, [(1, 1, 1)]])
    f = np.vstack([f, [(0, 1, 3)]])
    assert check_self_intersections(v, f).passed


def test_self_intersection_embedded_piece(piece64):
    res = check_self_intersections(piece64.vertices, piece64.faces)
    assert res.passed
    assert res.value == 0


def test_self_intersection_offset_copy_negative_control(piece64):
    # overlaying a slightly shifted copy of the piece forces real crossings
    m = assemble(piece64, n_periods=1)
    shift = 1e-3*np.array([1.0, 1.0, 1.0])
    v = np.vstack([m.vertices, m.vertices + shift])
    f = np.vstack([m.faces, m.faces + len(m.vertices)])
    res = check_self_intersections(v, f)
    assert not res.passed
    assert res.value > 0


# ------------------------------------------------------------ bell profile

def test_profile_bell(piece64):
    res = check_profile_bell(piece64)
    assert res.passed, res.detail


def test_profile_bell_not_applicable_off_axis(piece64):
    p_off = SurfaceParams(a=0.9, b=1.2, x=0.88, X=0.91, y=1.05)
    grid_off = dataclasses.replace(piece64.grid, p=p_off)
    piece_off = dataclasses.replace(piece64, grid=grid_off)
    with pytest.raises(NotApplicable):
        check_profile_bell(piece_off)


# -------------------------------------------------------------- diagnostics

def test_case_diagnostics_reports_quartic_roots(solved_params):
    out = case_diagnostics(solved_params)
    s = sym_funcs(solved_params)
    for r in out["vertical_normal_roots"]:
        assert abs(r**4 + s.S2*r*r + s.S4) < 1e-8
    assert out["conjugate_quadruple"] == (out["discriminant"] < 0)
    lo, hi = out["theta_outer_range"]
    assert -np.pi <= lo <= hi <= np.pi

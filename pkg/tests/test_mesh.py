import numpy as np
import pytest

from saddle_forge.errors import InvalidResolution, WeldMismatch
from saddle_forge.mesh import (BOUNDARY_TAGS, assemble, build_grid,
                               curvature_stats, edge_increments, export_obj,
                               integrate_piece, mean_curvature_norm,
                               _seam_deviation)
from saddle_forge.params import SurfaceParams
from saddle_forge.periods import resolve_params


# ------------------------------------------------------------------- grid

def test_grid_node_count_scales_with_resolution(solved_params):
    g = build_grid(solved_params, 64)
    assert 64*64 <= len(g.z) <= 4*64*64


def test_grid_rejects_bad_resolution(solved_params):
    with pytest.raises(InvalidResolution):
        build_grid(solved_params, 4)
    with pytest.raises(InvalidResolution):
        build_grid(solved_params, 64.5)
    with pytest.raises(InvalidResolution):
        build_grid(solved_params, 64, far_radius=solved_params.b)


def test_grid_tags_cover_boundary(solved_params):
    g = build_grid(solved_params, 32)
    assert set(g.tags) == set(BOUNDARY_TAGS)
    for tag in BOUNDARY_TAGS:
        assert len(g.tags[tag]) >= 2
    # neighbouring bottom stretches share their endpoint node, except at the
    # punctures a and 1 where the window removes the corner node
    assert len(np.intersect1d(g.tags["LF"], g.tags["FE"])) == 1
    assert len(np.intersect1d(g.tags["DC"], g.tags["CB"])) == 1
    assert len(np.intersect1d(g.tags["CB"], g.tags["BA"])) == 1
    assert len(np.intersect1d(g.tags["ED"], g.tags["DC"])) == 0


def test_grid_windows_are_dead(solved_params):
    # no node inside either puncture window
    g = build_grid(solved_params, 32)
    a = solved_params.a
    inside_a = (np.abs(g.z.real - a) < g.cut_a - 1e-12) \
        & (g.z.imag < g.cut_a - 1e-12)
    inside_1 = (np.abs(g.z.real - 1.0) < g.cut_1 - 1e-12) \
        & (g.z.imag < g.cut_1 - 1e-12)
    assert not inside_a.any()
    assert not inside_1.any()


def test_grid_is_nested_in_quadrant(solved_params):
    g = build_grid(solved_params, 32)
    assert np.all(g.z.real >= 0.0)
    assert np.all(g.z.imag >= 0.0)
    assert np.max(g.z.real) == pytest.approx(g.far_radius)
    assert np.max(g.z.imag) == pytest.approx(g.far_radius)


# ------------------------------------------------------------- increments

def test_edge_increment_matches_subdivided_path(solved_params):
    # integrating an edge in one piece must agree with summing four subedges
    p = solved_params
    z0 = np.array([0.05 + 0.3j, p.b + 0.4 + 0.02j, 0.3 + 0.01j])
    z1 = np.array([0.05 + 0.5j, p.b + 0.6 + 0.02j, 0.34 + 0.01j])
    whole = edge_increments(p, z0, z1)
    parts = np.zeros_like(whole)
    for k in range(4):
        za = z0 + (k/4)*(z1 - z0)
        zb = z0 + ((k + 1)/4)*(z1 - z0)
        parts += edge_increments(p, za, zb)
    assert np.allclose(whole, parts, rtol=1e-9, atol=1e-12)


def test_edge_increment_gauss_order_stability(solved_params):
    p = solved_params
    z0 = np.array([0.2 + 0.15j])
    z1 = np.array([0.25 + 0.18j])
    v8 = edge_increments(p, z0, z1, n_gauss=8)
    v20 = edge_increments(p, z0, z1, n_gauss=20)
    assert np.allclose(v8, v20, rtol=1e-11, atol=1e-14)


# ------------------------------------------------------------------ piece

def test_loop_closure_at_machine_level(piece64):
    floor = 64*np.finfo(float).eps*np.max(np.abs(piece64.vertices))
    assert np.max(piece64.loop_residuals) <= max(1e-8*np.max(piece64.cell_scales),
                                                 floor)


def test_vertical_period_equals_horizontal_flux(solved, piece64):
    # the tower period from the mesh must reproduce the residue computation
    assert piece64.T == pytest.approx(solved.report.r, rel=1e-6)


def test_symmetry_stretches_are_planar(piece64):
    dev, level_gap = _seam_deviation(piece64)
    bbox = np.linalg.norm(piece64.vertices.max(0) - piece64.vertices.min(0))
    for tag, d in dev.items():
        assert d < 1e-9*bbox, tag
    assert level_gap < 1e-9*bbox


def test_piece_is_minimal_to_discretization_error(piece64):
    assert mean_curvature_norm(piece64.vertices, piece64.faces) < 0.05


def test_curvature_stats_flat_sheet_is_exact():
    # planar triangulated sheet: H = 0 in the interior, boundary flagged
    n = 9
    xs, ys = np.meshgrid(np.arange(n), np.arange(n))
    verts = np.c_[xs.ravel(), ys.ravel(), np.zeros(n*n)]
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            k = i*n + j
            faces.append((k, k + 1, k + n + 1))
            faces.append((k, k + n + 1, k + n))
    H, A, interior = curvature_stats(verts, np.array(faces))
    assert interior.sum() == (n - 2)*(n - 2)
    assert np.max(H[interior]) < 1e-12


# --------------------------------------------------------------- assemble

def test_assemble_welds_and_is_symmetric(piece64):
    m = assemble(piece64, n_periods=1)
    assert len(m.vertices) < 8*len(piece64.vertices)  # welding happened
    assert m.faces.min() >= 0 and m.faces.max() < len(m.vertices)
    # the full tower is invariant under each coordinate reflection
    bbox = np.linalg.norm(m.vertices.max(0) - m.vertices.min(0))
    keys = {tuple(np.round(v/(1e-9*bbox)).astype(int)) for v in m.vertices}
    for sg in ([-1, 1, 1], [1, -1, 1], [1, 1, -1]):
        mirrored = {tuple(np.round(v*sg/(1e-9*bbox)).astype(int))
                    for v in m.vertices}
        assert mirrored == keys
    # faces are consistently oriented: every interior edge used twice,
    # once per direction
    from collections import Counter
    cnt = Counter()
    for t in m.faces:
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            cnt[e] += 1
    for (u, v), c in cnt.items():
        assert c == 1
        assert cnt.get((v, u), 0) <= 1


def test_assemble_stacks_periods(piece64):
    m1 = assemble(piece64, n_periods=1)
    m2 = assemble(piece64, n_periods=2)
    z1 = m1.vertices[:, 2].max() - m1.vertices[:, 2].min()
    z2 = m2.vertices[:, 2].max() - m2.vertices[:, 2].min()
    assert z2 - z1 == pytest.approx(piece64.T, rel=1e-9)


def test_assemble_rejects_unsolved_parameters(solved):
    # perturb b away from the period solution: the horizontal levels no
    # longer pair up and welding must refuse
    p_bad = resolve_params(solved.t, solved.X_offset, solved.a,
                           solved.b + 2e-3)
    piece_bad = integrate_piece(build_grid(p_bad, 32))
    with pytest.raises(WeldMismatch):
        assemble(piece_bad)


# ----------------------------------------------------------------- export

def test_export_obj_deterministic_and_round_trips(piece64, solved, tmp_path):
    m = assemble(piece64, n_periods=1)
    p1 = tmp_path/"a.obj"
    p2 = tmp_path/"b.obj"
    export_obj(m, p1, pi1=solved.report.pi1, pi2=solved.report.pi2)
    export_obj(m, p2, pi1=solved.report.pi1, pi2=solved.report.pi2)
    b1 = p1.read_bytes()
    assert b1 == p2.read_bytes()
    lines = b1.decode().splitlines()
    assert lines[0].startswith("# pi1=") and "pi2=" in lines[0]

    verts, faces = [], []
    for ln in lines:
        if ln.startswith("v "):
            verts.append([float(u) for u in ln.split()[1:]])
        elif ln.startswith("f "):
            faces.append([int(u) - 1 for u in ln.split()[1:]])
    verts = np.array(verts)
    faces = np.array(faces)
    assert len(verts) == len(m.vertices)
    assert np.array_equal(faces, m.faces)
    # writing the parsed mesh back is byte-identical (stable format width)
    from saddle_forge.mesh import AssembledMesh
    m2 = AssembledMesh(vertices=verts, faces=faces, T=m.T, n_periods=1)
    p3 = tmp_path/"c.obj"
    export_obj(m2, p3, pi1=solved.report.pi1, pi2=solved.report.pi2)
    assert p3.read_bytes() == b1

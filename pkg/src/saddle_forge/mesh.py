"""Meshing of the fundamental piece and assembly of the periodic tower.

The fundamental domain is the closed first quadrant of the z-plane.  A
tensor-product grid is laid over it (graded columns along the real axis,
exponentially graded rows in the imaginary direction), with two rectangular
windows removed around the end punctures z = a and z = 1.  Column clustering
toward the punctures and branch points is softened row by row with height so
cells never become slivers; the grid therefore has pure tensor topology (no
hanging nodes).

Positions come from integrating the Weierstrass forms edge by edge with
Gauss quadrature; edges near a branch point or puncture are integrated along
an analytically substituted path (square-root map at branch points, log map
at the simple poles), which is legitimate because the forms are holomorphic
between the singularities.  Per-cell loop-closure residuals certify the
integration; they sit at the rounding floor for a correct branch of w.

The assembled tower is the orbit of the piece under the three coordinate
reflections and vertical translations by the period T.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchInconsistency, InvalidResolution, WeldMismatch
from .params import SurfaceParams
from .quad import gauss_legendre_01
from .weier import phi_vec, phi_vec_delta

# column segments of the real axis: (start point name resolved per surface),
# grading map, node count at reference resolution 64
_SEG_COUNTS = (20, 20, 70, 22, 15, 25)
_REF_RES = 64
_GAMMA = 1.0          # softening strength of column clustering with height
_SUB_FACTOR = 10.0    # switch to substituted paths within 10 edge lengths
_ETA_ROWS_PER_64 = 3.3

BOUNDARY_TAGS = ("AL", "LF", "FE", "ED", "DC", "CB", "BA")


def _u_sym(s):
    return s**4/(s**4 + (1 - s)**4)


def _u_right(s):
    return 1.0 - (1.0 - s)**4


def _u_left(s):
    return s**4


@dataclass
class DomainGrid:
    p: SurfaceParams
    resolution: int
    far_radius: float
    cut_a: float
    cut_1: float
    eta: np.ndarray          # row heights, eta[0] = 0
    xs2d: np.ndarray         # per-row column positions, shape (rows, cols)
    alive: np.ndarray        # node mask (windows removed)
    idx: np.ndarray          # node index or -1
    z: np.ndarray            # flat complex node positions
    edges: np.ndarray        # (n_edges, 2) node index pairs
    quads: np.ndarray        # (n_quads, 4) node indices, ccw in the grid
    tags: dict = field(default_factory=dict)   # tag -> node index array


@dataclass
class PieceMesh:
    grid: DomainGrid
    vertices: np.ndarray         # (n, 3)
    faces: np.ndarray            # (2*n_quads, 3) triangles
    loop_residuals: np.ndarray   # per quad
    cell_scales: np.ndarray      # per quad, largest edge increment norm
    boundary: dict               # tag -> vertex index array (grid order)
    levels: dict                 # tag -> plane constant for planar stretches
    T: float                     # vertical period of the tower


@dataclass
class AssembledMesh:
    vertices: np.ndarray
    faces: np.ndarray
    T: float
    n_periods: int


def build_grid(p: SurfaceParams, resolution: int,
               far_radius: float = 20.0,
               cut_fraction: float = 0.3) -> DomainGrid:
    """Grid over the first quadrant with puncture windows removed.

    resolution is a linear density knob; node counts scale linearly with it
    and the reference layout is tuned at resolution 64.
    """
    p.validate()
    if not isinstance(resolution, (int, np.integer)) or resolution < 8:
        raise InvalidResolution(f"resolution must be an integer >= 8, got {resolution!r}")
    if far_radius <= p.b + 1.0:
        raise InvalidResolution(f"far_radius must exceed b + 1 = {p.b + 1.0}")
    a, b, x, y = p.a, p.b, p.x, p.y
    cut_a = cut_fraction*min(a - x, 1.0 - a)
    cut_1 = cut_fraction*min(1.0 - a, y - 1.0)

    # rows: exponential grading from eta ~ far*(res/2)^-4 (clamped well below
    # the z = 1 window so first-row vertical edges never straddle the pole)
    etaf = min(far_radius*(0.5*resolution)**(-4.0), 0.25*cut_1)
    lam = np.log(far_radius/etaf)
    n_eta = int(np.ceil(_ETA_ROWS_PER_64*lam*resolution/_REF_RES))
    s = np.arange(0, n_eta + 1)/n_eta
    eta = far_radius*np.expm1(lam*s)/np.expm1(lam)

    # columns: graded segments, softened toward uniform where the local row
    # spacing exceeds what the clustering could match
    segs = [(0.0, x, _u_right), (x, a, _u_sym), (a, 1.0, _u_sym),
            (1.0, y, _u_sym), (y, b, _u_sym), (b, far_radius, _u_left)]
    deta = lam*np.maximum(eta, eta[1])/n_eta
    rows = []
    for i in range(len(eta)):
        xs = [0.0]
        for (A, B, umap), n64 in zip(segs, _SEG_COUNTS):
            n = int(np.ceil(n64*resolution/_REF_RES))
            ss = np.arange(1, n + 1)/n
            wsoft = min(1.0, _GAMMA*n*deta[i]/(B - A))
            u = (1.0 - wsoft)*umap(ss) + wsoft*ss
            xs.extend((A + (B - A)*u).tolist())
        rows.append(xs)
    xs2d = np.array(rows)
    nr, nc = xs2d.shape

    tol = 1e-13
    alive = ~(((np.abs(xs2d - a) < cut_a - tol) & (eta[:, None] < cut_a - tol))
              | ((np.abs(xs2d - 1.0) < cut_1 - tol) & (eta[:, None] < cut_1 - tol)))
    idx = -np.ones(xs2d.shape, int)
    idx[alive] = np.arange(alive.sum())
    z = (xs2d + 1j*eta[:, None])[alive]

    edges = []
    for i in range(nr):
        for j in range(nc - 1):
            if alive[i, j] and alive[i, j + 1]:
                edges.append((idx[i, j], idx[i, j + 1]))
    for j in range(nc):
        for i in range(nr - 1):
            if alive[i, j] and alive[i + 1, j]:
                edges.append((idx[i, j], idx[i + 1, j]))
    edges = np.array(edges)

    quads = []
    for i in range(nr - 1):
        for j in range(nc - 1):
            if (alive[i, j] and alive[i, j + 1]
                    and alive[i + 1, j + 1] and alive[i + 1, j]):
                quads.append((idx[i, j], idx[i, j + 1],
                              idx[i + 1, j + 1], idx[i + 1, j]))
    quads = np.array(quads)

    # boundary tags: AL is the imaginary-axis column; the rest partition the
    # bottom row by the marked points, endpoints shared between neighbours
    tags = {"AL": idx[:, 0][alive[:, 0]]}
    xi0 = xs2d[0]
    alive0 = alive[0]
    stretches = {"LF": (0.0, x), "FE": (x, a), "ED": (a, 1.0),
                 "DC": (1.0, y), "CB": (y, b), "BA": (b, far_radius)}
    for tag, (lo, hi) in stretches.items():
        m = alive0 & (xi0 >= lo - tol) & (xi0 <= hi + tol)
        tags[tag] = idx[0][m]
    return DomainGrid(p=p, resolution=int(resolution), far_radius=far_radius,
                      cut_a=cut_a, cut_1=cut_1, eta=eta, xs2d=xs2d,
                      alive=alive, idx=idx, z=z, edges=edges, quads=quads,
                      tags=tags)


def edge_increments(p: SurfaceParams, z0: np.ndarray, z1: np.ndarray,
                    n_gauss: int = 8) -> np.ndarray:
    """Integral of (phi1, phi2, phi3) along each straight edge z0 -> z1.

    Edges whose nearest singularity lies within _SUB_FACTOR edge lengths are
    rerouted: z = v + s^2 with s linear at a branch point v (makes the
    integrand analytic in s), z = p + e^u with u linear at a puncture p
    (exact for the simple-pole part).  Path deformation is allowed because
    the forms are holomorphic between singularities, so the loop-closure
    telescoping of shared edges is preserved exactly.
    """
    gl_x, gl_w = gauss_legendre_01(n_gauss)
    branch_anchors = np.array([p.x, p.y, p.b])
    pole_anchors = np.array([p.a, 1.0])

    def nearest(anchors):
        d = np.minimum(np.abs(z0[:, None] - anchors[None, :]),
                       np.abs(z1[:, None] - anchors[None, :]))
        j = np.argmin(d, axis=1)
        return j, d[np.arange(len(z0)), j]

    jb, db = nearest(branch_anchors)
    jp, dp = nearest(pole_anchors)
    L = np.abs(z1 - z0)
    sub_b = (db < _SUB_FACTOR*L) & (db <= dp)
    sub_p = ~sub_b & (dp < _SUB_FACTOR*L)
    out = np.zeros((len(z0), 3), complex)

    m = ~(sub_b | sub_p)
    if m.any():
        a0, d = z0[m], (z1 - z0)[m]
        acc = np.zeros((int(m.sum()), 3), complex)
        for xg, wg in zip(gl_x, gl_w):
            acc += wg*phi_vec(p, a0 + xg*d)
        out[m] = acc*d[:, None]
    if sub_b.any():
        for k, v in enumerate(branch_anchors):
            mk = sub_b & (jb == k)
            if not mk.any():
                continue
            s0 = np.sqrt(z0[mk] - v)
            s1 = np.sqrt(z1[mk] - v)
            ds = s1 - s0
            acc = np.zeros((int(mk.sum()), 3), complex)
            for xg, wg in zip(gl_x, gl_w):
                ss = s0 + xg*ds
                acc += wg*phi_vec_delta(p, v, ss*ss)*(2.0*ss)[:, None]
            out[mk] = acc*ds[:, None]
    if sub_p.any():
        for k, pp in enumerate(pole_anchors):
            mk = sub_p & (jp == k)
            if not mk.any():
                continue
            u0 = np.log(z0[mk] - pp)
            u1 = np.log(z1[mk] - pp)
            du = u1 - u0
            acc = np.zeros((int(mk.sum()), 3), complex)
            for xg, wg in zip(gl_x, gl_w):
                e = np.exp(u0 + xg*du)
                acc += wg*phi_vec_delta(p, pp, e)*e[:, None]
            out[mk] = acc*du[:, None]
    return out


def integrate_piece(grid: DomainGrid, lc_tol: float = 1e-8,
                    n_gauss: int = 8) -> PieceMesh:
    """Positions by breadth-first accumulation of real edge increments.

    Every grid quad provides a loop-closure residual; each must stay below
    lc_tol times the cell scale (largest edge increment of the quad), with
    an absolute floor at the rounding level of the coordinates.
    """
    p = grid.p
    E0, E1 = grid.edges[:, 0], grid.edges[:, 1]
    inc = edge_increments(p, grid.z[E0], grid.z[E1], n_gauss=n_gauss)
    rinc = np.real(inc)

    einc = {}
    for k in range(len(E0)):
        einc[(E0[k], E1[k])] = rinc[k]

    def get(u, v):
        return einc[(u, v)] if (u, v) in einc else -einc[(v, u)]

    lc = np.empty(len(grid.quads))
    scale = np.empty(len(grid.quads))
    for q, (q0, q1, q2, q3) in enumerate(grid.quads):
        e = [get(q0, q1), get(q1, q2), get(q2, q3), get(q3, q0)]
        lc[q] = np.linalg.norm(e[0] + e[1] + e[2] + e[3])
        scale[q] = max(np.linalg.norm(ei) for ei in e)

    nnode = len(grid.z)
    adj = [[] for _ in range(nnode)]
    for k in range(len(E0)):
        adj[E0[k]].append((E1[k], k, 1.0))
        adj[E1[k]].append((E0[k], k, -1.0))
    pos = np.zeros((nnode, 3))
    seen = np.zeros(nnode, bool)
    root = grid.idx[0, 0]
    seen[root] = True
    dq = deque([root])
    while dq:
        u = dq.popleft()
        for (v, k, sg) in adj[u]:
            if not seen[v]:
                seen[v] = True
                pos[v] = pos[u] + sg*rinc[k]
                dq.append(v)
    if not seen.all():
        raise BranchInconsistency(f"grid is disconnected: {int(np.sum(~seen))} "
                                  "nodes unreachable")

    floor = 64*np.finfo(float).eps*np.max(np.abs(pos))
    bad = lc > np.maximum(lc_tol*scale, floor)
    if bad.any():
        q = int(np.argmax(lc/np.maximum(scale, 1e-300)))
        raise BranchInconsistency(
            f"{int(bad.sum())} cells violate loop closure; worst residual "
            f"{lc[q]:.3e} at cell scale {scale[q]:.3e}")

    boundary = {tag: np.asarray(nodes) for tag, nodes in grid.tags.items()}

    # normalization: the vertical plane of the imaginary-axis curve (AL) to
    # x2 = 0, the vertical plane of the first bottom stretch (LF) to x1 = 0,
    # the lower horizontal mirror (FE) to x3 = 0
    pos[:, 0] -= np.mean(pos[boundary["LF"], 0])
    pos[:, 1] -= np.mean(pos[boundary["AL"], 1])
    lvl_FE = np.mean(pos[boundary["FE"], 2])
    pos[:, 2] -= lvl_FE
    lvl_ED = np.mean(pos[boundary["ED"], 2])
    lvl_DC = np.mean(pos[boundary["DC"], 2])
    levels = {"LF": 0.0, "AL": 0.0, "FE": 0.0, "ED": lvl_ED, "DC": lvl_DC,
              "CB": float(np.mean(pos[boundary["CB"], 0])),
              "BA": float(np.mean(pos[boundary["BA"], 2]))}
    T = 2.0*abs(lvl_ED)

    tris = np.concatenate([grid.quads[:, [0, 1, 2]], grid.quads[:, [0, 2, 3]]])
    return PieceMesh(grid=grid, vertices=pos, faces=tris, loop_residuals=lc,
                     cell_scales=scale, boundary=boundary, levels=levels,
                     T=float(T))


def _seam_deviation(piece: PieceMesh):
    """Max out-of-plane deviation of each symmetry stretch, and the mismatch
    of the horizontal levels against the two-mirror structure.

    The four horizontal stretches must occupy exactly two levels: FE and DC
    at 0 (the lower mirror) and ED and BA at the half-period; the level gaps
    measure how badly an unsolved period problem breaks this."""
    v = piece.vertices
    bd = piece.boundary
    dev = {
        "AL": float(np.max(np.abs(v[bd["AL"], 1]))),
        "LF": float(np.max(np.abs(v[bd["LF"], 0]))),
        "FE": float(np.max(np.abs(v[bd["FE"], 2]))),
        "ED": float(np.max(np.abs(v[bd["ED"], 2] - piece.levels["ED"]))),
        "DC": float(np.max(np.abs(v[bd["DC"], 2] - piece.levels["DC"]))),
        "CB": float(np.max(np.abs(v[bd["CB"], 0] - piece.levels["CB"]))),
        "BA": float(np.max(np.abs(v[bd["BA"], 2] - piece.levels["BA"]))),
    }
    level_gap = max(abs(piece.levels["DC"]),
                    abs(piece.levels["BA"] - piece.levels["ED"]))
    return dev, float(level_gap)


def assemble(piece: PieceMesh, n_periods: int = 1,
             weld_tol: float = 1e-9, check: bool = True) -> AssembledMesh:
    """Orbit of the piece under {+-x1} x {+-x2} x {+-x3} and k*T*e3.

    Vertices are welded by quantizing coordinates to weld_tol times the
    bounding-box diagonal.  With unsolved period parameters the symmetry
    stretches fail to lie in the reflection planes and the copies cannot be
    glued; this is reported as WeldMismatch before any welding is attempted.
    """
    v = piece.vertices
    bbox = np.linalg.norm(v.max(axis=0) - v.min(axis=0))
    tol = weld_tol*bbox
    if check:
        dev, level_gap = _seam_deviation(piece)
        bad = {k: d for k, d in dev.items() if d > tol}
        if bad:
            raise WeldMismatch(f"symmetry stretches off their planes beyond "
                               f"{tol:.3e}: {bad}")
        if level_gap > tol:
            raise WeldMismatch(
                f"horizontal mirror levels do not pair up (DC with FE, BA "
                f"with ED): gap {level_gap:.3e} exceeds tol {tol:.3e} -- "
                f"period problem not solved")

    verts_out = []
    faces_out = []
    vmap = {}

    def key(q):
        return (int(round(q[0]/tol)), int(round(q[1]/tol)), int(round(q[2]/tol)))

    for kper in range(n_periods):
        shift = np.array([0.0, 0.0, kper*piece.T])
        for signs in itertools.product((1.0, -1.0), repeat=3):
            sg = np.array(signs)
            vv = v*sg + shift
            flip = sg[0]*sg[1]*sg[2] < 0
            local = np.empty(len(vv), int)
            for i, q in enumerate(vv):
                kq = key(q)
                j = vmap.get(kq)
                if j is None:
                    j = len(verts_out)
                    vmap[kq] = j
                    verts_out.append(q)
                local[i] = j
            f = local[piece.faces]
            if flip:
                f = f[:, ::-1]
            faces_out.append(f)
    vertices = np.array(verts_out)
    faces = np.concatenate(faces_out)
    # drop faces degenerated by welding, and exact duplicates from faces
    # lying inside a reflection plane
    ok = ((faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2])
          & (faces[:, 2] != faces[:, 0]))
    faces = faces[ok]
    canon = np.sort(faces, axis=1)
    _, keep = np.unique(canon, axis=0, return_index=True)
    faces = faces[np.sort(keep)]
    return AssembledMesh(vertices=vertices, faces=faces, T=piece.T,
                         n_periods=n_periods)


def curvature_stats(vertices: np.ndarray, faces: np.ndarray):
    """Cotangent-Laplacian mean-curvature magnitude per vertex.

    Returns (H, area_weight, interior_mask); boundary vertices (incident to
    an edge with a single face) are excluded from the mask because the
    one-ring formula is meaningless there.
    """
    nnode = len(vertices)
    v0 = vertices[faces[:, 0]]
    v1 = vertices[faces[:, 1]]
    v2 = vertices[faces[:, 2]]
    nrm = np.cross(v1 - v0, v2 - v0)
    dblA = np.linalg.norm(nrm, axis=1)

    def cot(pA, pB, pC):
        u_ = pB - pA
        w_ = pC - pA
        return (np.einsum("ij,ij->i", u_, w_)
                / np.maximum(np.linalg.norm(np.cross(u_, w_), axis=1), 1e-300))

    c0, c1, c2 = cot(v0, v1, v2), cot(v1, v2, v0), cot(v2, v0, v1)
    L = np.zeros((nnode, 3))
    A = np.zeros(nnode)
    for (ia, ib, cw) in ((1, 2, c0), (2, 0, c1), (0, 1, c2)):
        d = vertices[faces[:, ib]] - vertices[faces[:, ia]]
        np.add.at(L, faces[:, ia], cw[:, None]*d)
        np.add.at(L, faces[:, ib], -cw[:, None]*d)
    for k in range(3):
        np.add.at(A, faces[:, k], dblA/6.0)

    ecount = defaultdict(int)
    for t in faces:
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            ecount[(min(e), max(e))] += 1
    bnd = set()
    for e, c in ecount.items():
        if c == 1:
            bnd.update(e)
    interior = np.ones(nnode, bool)
    if bnd:
        interior[list(bnd)] = False
    H = np.linalg.norm(L, axis=1)/(4.0*np.maximum(A, 1e-300))
    return H, A, interior


def mean_curvature_norm(vertices: np.ndarray, faces: np.ndarray) -> float:
    """Area-weighted mean of |H| over interior vertices (the convergence
    norm of the minimality check)."""
    H, A, interior = curvature_stats(vertices, faces)
    w = A[interior]
    return float(np.sum(w*H[interior])/np.sum(w))


def export_obj(mesh, path, pi1: float = 0.0, pi2: float = 0.0,
               comment: str | None = None):
    """Deterministic OBJ writer; the header records the period residuals."""
    lines = [f"# pi1={pi1:.17g} pi2={pi2:.17g}"]
    if comment:
        lines.append(f"# {comment}")
    for v in mesh.vertices:
        lines.append("v %.12e %.12e %.12e" % (v[0], v[1], v[2]))
    for f in mesh.faces:
        lines.append("f %d %d %d" % (f[0] + 1, f[1] + 1, f[2] + 1))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

"""Period problems: residues r and R, the integrals I, J, K, the implicit
residue-matching function F(y), and the two-dimensional period solve.

The three conditions that make the immersion single-valued are
    r = R            (matched residues at the two end punctures; solved
                      implicitly for y via the polynomial F below),
    pi1 = I - J = 0  and  pi2 = K - R/2 = 0   (solved for (a, b)).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, NoConvergence, NoRoot, SeedBoxExhausted
from .params import SurfaceParams, SymFuncs, from_family, sym_funcs
from .quad import DEFAULT_SPEC, QuadratureSpec, integrate_singular, integrate_to_infinity


def _finite_tail(vals):
    """Zero out overflow garbage from the extreme double-exponential tail,
    where the integrand itself has long since decayed below machine epsilon."""
    vals = np.asarray(vals)
    return np.where(np.isfinite(vals), vals, 0.0)


@dataclass(frozen=True)
class PeriodReport:
    r: float
    R: float
    I: float
    J: float
    K: float
    pi1: float
    pi2: float
    F_residual: float


@dataclass(frozen=True)
class FamilySolution:
    t: float
    X_offset: float
    a: float
    b: float
    y: float
    report: PeriodReport


def residue_r(p: SurfaceParams, s: SymFuncs) -> float:
    """Closed form for 2*pi*i times the residue of dh at the puncture z=1."""
    a, b, x, y = p.a, p.b, p.x, p.y
    rad = (1 - b*b)*(1 - x*x)*(1 - y*y)
    return float(np.pi*(1 + s.S2 + s.S4)/((1 - a*a)*np.sqrt(rad)))


def residue_R(p: SurfaceParams, s: SymFuncs) -> float:
    """Closed form for 2*pi*i times the residue of dh at the puncture z=a."""
    a, b, x, y = p.a, p.b, p.x, p.y
    rad = (a*a - b*b)*(a*a - x*x)*(a*a - y*y)
    return float(np.pi*(a**4 + s.S2*a*a + s.S4)/((1 - a*a)*np.sqrt(rad)))


def I_integral(p: SurfaceParams, s: SymFuncs,
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Horizontal period integral along the real axis beyond the last branch
    point: integrand has an inverse-square-root endpoint at t=b and decays
    like S1/t^3."""
    a, b, x, y = p.a, p.b, p.x, p.y

    def f(t, dlo, dhi):
        del dhi
        with np.errstate(over="ignore", invalid="ignore"):
            rad = dlo*(t + b)*(t*t - x*x)*(t*t - y*y)
            out = ((s.S1*t**4 + s.S3*t*t + s.S5)
                   / ((t*t - 1.0)*(t*t - a*a)*np.sqrt(rad)))
        return _finite_tail(out)

    return float(integrate_to_infinity(f, b, spec, singular_at_lo=True, scale=b)[0])


def J_integral(p: SurfaceParams, s: SymFuncs,
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Horizontal period integral along the imaginary axis z = it.

    There the Gauss map is the positive real number g = tan(psi/2) with
    psi(t) = 2 atan(t/X) - atan(t/b) + atan(t/x) - atan(t/y), so
    g - 1/g = -2/tan(psi) and the integrand is real."""
    a, b, x, X, y = p.a, p.b, p.x, p.X, p.y

    def f(t, dlo, dhi):
        del dlo, dhi
        with np.errstate(over="ignore", invalid="ignore"):
            psi = (2*np.arctan(t/X) - np.arctan(t/b)
                   + np.arctan(t/x) - np.arctan(t/y))
            gm = 2.0/np.tan(psi)
            rad = (t*t + b*b)*(t*t + x*x)*(t*t + y*y)
            out = (0.5*t*(t**4 - s.S2*t*t + s.S4)*gm
                   / ((t*t + 1.0)*(t*t + a*a)*np.sqrt(rad)))
        return _finite_tail(out)

    return float(integrate_to_infinity(f, 0.0, spec, scale=1.0)[0])


def K_integral(p: SurfaceParams, s: SymFuncs,
               spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Vertical flux integral over the branch cut (y, b): inverse-square-root
    singularities at both endpoints, no interior singularity."""
    a, b, x, y = p.a, p.b, p.x, p.y

    def f(t, dlo, dhi):
        rad = dhi*(b + t)*(t*t - x*x)*dlo*(t + y)
        return ((t**4 + s.S2*t*t + s.S4)/((1.0 - t*t)*(a*a - t*t))
                * t/np.sqrt(rad))

    return float(integrate_singular(f, y, b, spec)[0])


def F_eval(a: float, b: float, x: float, X: float, y: float) -> float:
    """Polynomial whose root y in (1, b) matches the two residues (r = R)."""
    s = sym_funcs(SurfaceParams(a=a, b=b, x=x, X=X, y=y))
    A = 1 + s.S2 + s.S4
    B = a**4 + s.S2*a*a + s.S4
    return (A*A*(a*a - x*x)*(a*a - b*b)*(a*a - y*y)
            - B*B*(1 - y*y)*(1 - b*b)*(1 - x*x))


def dF_dy(a: float, b: float, x: float, X: float, y: float) -> float:
    """Analytic y-derivative of F (S2 and S4 are linear in y)."""
    s = sym_funcs(SurfaceParams(a=a, b=b, x=x, X=X, y=y))
    dS2 = b - x - 2*X
    dS4 = 2*b*x*X + (b - x)*X*X
    A = 1 + s.S2 + s.S4
    B = a**4 + s.S2*a*a + s.S4
    dA = dS2 + dS4
    dB = dS2*a*a + dS4
    return (2*A*dA*(a*a - x*x)*(a*a - b*b)*(a*a - y*y)
            + A*A*(a*a - x*x)*(a*a - b*b)*(-2*y)
            - 2*B*dB*(1 - y*y)*(1 - b*b)*(1 - x*x)
            - B*B*(-2*y)*(1 - b*b)*(1 - x*x))


def solve_y(a: float, b: float, x: float, X: float,
            tol: float = 1e-12, n_scan: int = 400) -> float:
    """Root of F in (1, b): bracketing scan, bisection, Newton polish."""
    ys = np.linspace(1 + 1e-9, b - 1e-9, n_scan)
    Fs = np.array([F_eval(a, b, x, X, yy) for yy in ys])
    sign_change = np.where(np.sign(Fs[:-1])*np.sign(Fs[1:]) < 0)[0]
    if len(sign_change) == 0:
        raise NoRoot(f"F has no sign change in (1, {b}) for "
                     f"(a,b,x,X)=({a},{b},{x},{X})")
    k = sign_change[0]
    y0, y1 = ys[k], ys[k + 1]
    f0 = F_eval(a, b, x, X, y0)
    for _ in range(200):
        ym = 0.5*(y0 + y1)
        fm = F_eval(a, b, x, X, ym)
        if f0*fm <= 0:
            y1 = ym
        else:
            y0, f0 = ym, fm
        if y1 - y0 < 1e-13:
            break
    yy = 0.5*(y0 + y1)
    for _ in range(50):
        fv = F_eval(a, b, x, X, yy)
        dv = dF_dy(a, b, x, X, yy)
        if dv == 0:
            break
        step = fv/dv
        yn = yy - step
        if not (1.0 < yn < b):
            break
        yy = yn
        if abs(step) < tol*yy:
            break
    return float(yy)


def resolve_params(t: float, X_offset: float, a: float, b: float,
                   y_tol: float = 1e-12) -> SurfaceParams:
    """Full moduli from family coordinates: y from the residue match."""
    x = a - t
    X = a + X_offset
    y = solve_y(a, b, x, X, tol=y_tol)
    return from_family(t, X_offset, a, b, y)


def period_report(t: float, X_offset: float, a: float, b: float,
                  spec: QuadratureSpec = DEFAULT_SPEC) -> PeriodReport:
    p = resolve_params(t, X_offset, a, b)
    return period_report_for(p, spec)


def period_report_for(p: SurfaceParams, spec: QuadratureSpec = DEFAULT_SPEC) -> PeriodReport:
    s = sym_funcs(p)
    r = residue_r(p, s)
    R = residue_R(p, s)
    I = I_integral(p, s, spec)
    J = J_integral(p, s, spec)
    K = K_integral(p, s, spec)
    return PeriodReport(r=r, R=R, I=I, J=J, K=K, pi1=I - J, pi2=K - 0.5*R,
                        F_residual=F_eval(p.a, p.b, p.x, p.X, p.y))


# enlarged box the damped Newton iterates may roam in (the documented seed
# window is well inside it)
SEARCH_BOX = (0.7, 0.9995, 1.0005, 2.5)
DEFAULT_SEED_BOX = (0.82, 0.98, 1.01, 1.51)


def _pis(t, X_offset, a, b, spec):
    rep = period_report(t, X_offset, a, b, spec)
    return np.array([rep.pi1, rep.pi2]), rep


# largest perturbation of the family coordinates for which the warm-started
# Newton continuation is supported
FAMILY_EPS = 0.05


def check_family_coords(t: float, X_offset: float,
                        eps: float = FAMILY_EPS) -> None:
    """Validate family coordinates: t in (0, eps], X_offset in [0, eps)."""
    if not (0.0 < t <= eps):
        raise DomainViolation(f"t must lie in (0, {eps}], got {t}")
    if not (0.0 <= X_offset < eps):
        raise DomainViolation(f"X_offset must lie in [0, {eps}), got {X_offset}")


def solve_periods(t: float, X_offset: float,
                  seed_box=DEFAULT_SEED_BOX,
                  tol: float = 1e-10,
                  spec: QuadratureSpec = DEFAULT_SPEC,
                  seed: tuple[float, float] | None = None,
                  max_iter: int = 80,
                  eps: float = FAMILY_EPS) -> FamilySolution:
    """Damped Newton on (pi1, pi2)(a, b) with a finite-difference Jacobian.

    Starts from the seed-box centre (or the supplied warm start); if Newton
    stalls, falls back to a coarse scan of the seed box for a fresh start.
    """
    check_family_coords(t, X_offset, eps)
    a_lo, a_hi, b_lo, b_hi = seed_box
    starts = []
    if seed is not None:
        starts.append(np.array(seed, dtype=float))
    starts.append(np.array([0.5*(a_lo + a_hi), 0.5*(b_lo + b_hi)]))
    for fa in (0.25, 0.75):
        for fb in (0.25, 0.75):
            starts.append(np.array([a_lo + fa*(a_hi - a_lo),
                                    b_lo + fb*(b_hi - b_lo)]))
    best_v, best_pv = None, None
    for start in starts:
        try:
            v, pv = _newton2(t, X_offset, start, tol, spec, max_iter)
        except (NoRoot, NoConvergence):
            continue
        if np.max(np.abs(pv)) < tol:
            p = resolve_params(t, X_offset, v[0], v[1])
            rep = period_report_for(p, spec)
            return FamilySolution(t=t, X_offset=X_offset, a=float(v[0]),
                                  b=float(v[1]), y=p.y, report=rep)
        if best_pv is None or np.max(np.abs(pv)) < np.max(np.abs(best_pv)):
            best_v, best_pv = v, pv
    if best_v is None:
        raise SeedBoxExhausted(f"no seed in {seed_box} produced a solve for "
                               f"(t, X_offset)=({t}, {X_offset})")
    raise NoConvergence(
        f"period solve stalled at (a,b)={tuple(best_v)} with residuals {tuple(best_pv)}",
        best=tuple(best_v), residual=float(np.max(np.abs(best_pv))))


def _newton2(t, X_offset, v0, tol, spec, max_iter):
    a_min, a_max, b_min, b_max = SEARCH_BOX
    v = np.array(v0, dtype=float)
    pv, _ = _pis(t, X_offset, v[0], v[1], spec)
    for _ in range(max_iter):
        if np.max(np.abs(pv)) < tol:
            return v, pv
        h = 1e-7
        Jm = np.zeros((2, 2))
        for j in range(2):
            vp = v.copy()
            vp[j] += h
            Jm[:, j] = (_pis(t, X_offset, vp[0], vp[1], spec)[0] - pv)/h
        dv = np.linalg.solve(Jm, -pv)
        lam = 1.0
        while True:
            vn = v + lam*dv
            if a_min < vn[0] < a_max and b_min < vn[1] < b_max:
                try:
                    pn, _ = _pis(t, X_offset, vn[0], vn[1], spec)
                    if np.linalg.norm(pn) < np.linalg.norm(pv) or lam <= 0.25:
                        v, pv = vn, pn
                        break
                except (NoRoot, FloatingPointError):
                    pass
            lam *= 0.5
            if lam < 1e-8:
                return v, pv
    return v, pv


def sweep_family(t_grid, X_grid, spec: QuadratureSpec = DEFAULT_SPEC,
                 tol: float = 1e-10):
    """Solve the family over a (t, X_offset) grid with warm starts.

    Returns a list of (t, X_offset, solution_or_None) rows in grid order;
    failures are recorded, not fatal.  t = 0 rows are rejected up front
    (degenerate limit: y -> 1 collides with an integration endpoint).
    """
    rows = []
    seed = None
    for t in t_grid:
        if t <= 0:
            raise ValueError("t must be positive (t = 0 is the degenerate limit)")
        for X_offset in X_grid:
            try:
                sol = solve_periods(t, X_offset, tol=tol, spec=spec, seed=seed)
                seed = (sol.a, sol.b)
                rows.append((t, X_offset, sol))
            except (NoRoot, NoConvergence, SeedBoxExhausted):
                rows.append((t, X_offset, None))
    return rows


SWEEP_HEADER = ["t", "X_offset", "a", "b", "y", "r", "R", "I", "J", "K",
                "pi1", "pi2", "converged"]


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_HEADER)
        for t, X_offset, sol in rows:
            if sol is None:
                wr.writerow([f"{t:.17g}", f"{X_offset:.17g}"] + [""]*10 + ["0"])
            else:
                rep = sol.report
                vals = [sol.a, sol.b, sol.y, rep.r, rep.R, rep.I, rep.J,
                        rep.K, rep.pi1, rep.pi2]
                wr.writerow([f"{t:.17g}", f"{X_offset:.17g}"]
                            + [f"{v:.17g}" for v in vals] + ["1"])

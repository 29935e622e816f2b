import numpy as np
import pytest

from _oracles import (residue_contour_oracle, scipy_I_oracle, scipy_J_oracle,
                      scipy_K_oracle)
from conftest import draw_params
from saddle_forge.errors import DomainViolation, NoConvergence, NoRoot
from saddle_forge.params import SurfaceParams, sym_funcs
from saddle_forge.periods import (DEFAULT_SEED_BOX, SWEEP_HEADER, F_eval,
                                  I_integral, J_integral, K_integral, dF_dy,
                                  period_report, period_report_for, residue_R,
                                  residue_r, solve_periods, solve_y,
                                  sweep_family, write_sweep_csv)

P0 = SurfaceParams(a=0.5, b=2.0, x=0.3, X=0.5, y=1.5)


# ---------------------------------------------------------------- residues

def test_residues_match_contour_oracle():
    # contour integration of dh with stepwise branch continuation is a fully
    # independent route to the flux residues: the loop around z = 1 gives -r,
    # the loop around z = a gives +R (opposite loop orientations on the curve)
    rng = np.random.default_rng(17)
    for _ in range(12):
        p = draw_params(rng)
        s = sym_funcs(p)
        r = residue_r(p, s)
        c1 = residue_contour_oracle(p, 1.0)
        assert abs(c1 - (-r)) < 1e-8*max(1.0, abs(r))
        R = residue_R(p, s)
        ca = residue_contour_oracle(p, p.a)
        assert abs(ca - R) < 1e-8*max(1.0, abs(R))


def test_residue_signs_and_reality():
    s = sym_funcs(P0)
    assert np.isreal(residue_r(P0, s))
    assert np.isreal(residue_R(P0, s))


# ----------------------------------------------------------- flux integrals

@pytest.mark.parametrize("p", [
    SurfaceParams(a=0.5, b=2.0, x=0.3, X=0.5, y=1.5),
    SurfaceParams(a=0.9, b=1.3, x=0.85, X=0.91, y=1.1),
])
def test_I_matches_scipy_oracle(p):
    assert I_integral(p, sym_funcs(p)) == pytest.approx(scipy_I_oracle(p),
                                                        rel=1e-9, abs=1e-11)


@pytest.mark.parametrize("p", [
    SurfaceParams(a=0.5, b=2.0, x=0.3, X=0.5, y=1.5),
    SurfaceParams(a=0.9, b=1.3, x=0.85, X=0.91, y=1.1),
])
def test_J_matches_scipy_oracle(p):
    assert J_integral(p, sym_funcs(p)) == pytest.approx(scipy_J_oracle(p),
                                                        rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("p", [
    SurfaceParams(a=0.5, b=2.0, x=0.3, X=0.5, y=1.5),
    SurfaceParams(a=0.9, b=1.3, x=0.85, X=0.91, y=1.1),
])
def test_K_matches_scipy_oracle(p):
    assert K_integral(p, sym_funcs(p)) == pytest.approx(scipy_K_oracle(p),
                                                        rel=1e-9, abs=1e-11)


# ------------------------------------------------------- implicit y solve

def test_F_derivative_matches_finite_differences():
    rng = np.random.default_rng(23)
    for _ in range(30):
        p = draw_params(rng)
        h = 1e-6*(p.b - 1.0)
        fd = (F_eval(p.a, p.b, p.x, p.X, p.y + h)
              - F_eval(p.a, p.b, p.x, p.X, p.y - h))/(2*h)
        an = dF_dy(p.a, p.b, p.x, p.X, p.y)
        assert an == pytest.approx(fd, rel=1e-5, abs=1e-8*max(1.0, abs(an)))


def test_F_vanishes_at_degenerate_root():
    # at x = X = a the implicit equation has the exact root y = 1
    for (a, b) in [(0.5, 2.0), (0.9, 1.2)]:
        assert abs(F_eval(a, b, a, a, 1.0)) < 1e-12


def test_solve_y_root_properties():
    rng = np.random.default_rng(29)
    for _ in range(25):
        a = rng.uniform(0.6, 0.95)
        b = rng.uniform(1.05, 1.8)
        x = a - rng.uniform(0.002, 0.05)
        X = a + rng.uniform(0.0, min(0.05, 0.9*(1.0 - a)))
        y = solve_y(a, b, x, X)
        assert 1.0 < y < b
        assert abs(F_eval(a, b, x, X, y)) < 1e-10
        # the root enforces equality of the two horizontal flux residues
        p = SurfaceParams(a=a, b=b, x=x, X=X, y=y).validate()
        s = sym_funcs(p)
        r, R = residue_r(p, s), residue_R(p, s)
        assert abs(r - R) < 1e-8*max(abs(r), abs(R))


def test_solve_y_raises_when_no_root():
    # far from the degenerate corner the residue match has no solution:
    # F keeps one sign on all of (1, b) for these moduli
    with pytest.raises(NoRoot):
        solve_y(0.69, 1.39, 0.038, 0.70)


# ----------------------------------------------------------- period report

def test_period_report_consistency(solved):
    rep = solved.report
    assert abs(rep.r - rep.R) < 1e-9*abs(rep.r)
    assert abs(rep.pi1) < 1e-10 and abs(rep.pi2) < 1e-10
    assert abs(rep.pi1 - (rep.I - rep.J)) < 1e-14*max(1.0, abs(rep.I))
    assert abs(rep.pi2 - (rep.K - 0.5*rep.R)) < 1e-14*max(1.0, abs(rep.K))
    assert rep.F_residual < 1e-10


def test_period_report_for_params_matches_family_route(solved):
    p = SurfaceParams(a=solved.a, b=solved.b, x=solved.a - solved.t,
                      X=solved.a, y=solved.y)
    rep = period_report_for(p)
    assert rep.pi1 == pytest.approx(solved.report.pi1, abs=1e-12)
    assert rep.pi2 == pytest.approx(solved.report.pi2, abs=1e-12)


def test_period_map_changes_sign_over_seed_window():
    # the Newton solve works because each period component changes sign
    # across the default seed box at the reference family member
    lo_a, hi_a, lo_b, hi_b = DEFAULT_SEED_BOX
    corners = [(lo_a, lo_b), (hi_a, lo_b), (lo_a, hi_b), (hi_a, hi_b)]
    pi1 = []
    pi2 = []
    for (a, b) in corners:
        try:
            rep = period_report(0.02, 0.0, a, b)
        except (NoRoot, DomainViolation, NoConvergence):
            continue
        pi1.append(rep.pi1)
        pi2.append(rep.pi2)
    assert len(pi1) >= 3
    assert min(pi1) < 0 < max(pi1)
    assert min(pi2) < 0 < max(pi2)


# ------------------------------------------------------------ full solve

def test_solve_periods_reference_member(solved):
    assert 0.7 < solved.a < 1.0
    assert 1.0 < solved.b < 2.0
    assert 1.0 < solved.y < solved.b


def test_solve_periods_continuity(solved):
    near = solve_periods(0.021, 0.0, tol=1e-10)
    assert abs(near.a - solved.a) < 0.05
    assert abs(near.b - solved.b) < 0.05


def test_solve_periods_rejects_bad_family_coordinates():
    with pytest.raises(DomainViolation):
        solve_periods(-1.0, 0.0)
    with pytest.raises(DomainViolation):
        solve_periods(0.0, 0.0)
    with pytest.raises(DomainViolation):
        solve_periods(0.02, -0.01)
    with pytest.raises(DomainViolation):
        solve_periods(0.2, 0.0)  # outside the perturbative regime


# ----------------------------------------------------------------- sweep

def test_sweep_family_and_csv_round_trip(tmp_path):
    rows = sweep_family([0.015, 0.02], [0.0, 0.01], tol=1e-9)
    assert len(rows) == 4
    for t, X_offset, sol in rows:
        assert sol is not None
        assert sol.t == t and sol.X_offset == X_offset
        assert abs(sol.report.pi1) < 1e-9
        assert abs(sol.report.pi2) < 1e-9
    out = tmp_path/"sweep.csv"
    write_sweep_csv(rows, out)
    text = out.read_text().splitlines()
    assert text[0] == ",".join(SWEEP_HEADER)
    assert text[0] == "t,X_offset,a,b,y,r,R,I,J,K,pi1,pi2,converged"
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert data.shape == (4,)
    assert np.allclose(data["a"], [row[2].a for row in rows], rtol=1e-15)
    assert np.all(data["converged"] == 1)


def test_sweep_family_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        sweep_family([0.0, 0.02], [0.0])

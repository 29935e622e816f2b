"""Command-line interface.

Subcommands: solve, periods, mesh, verify, sweep.  Machine-readable results
go to stdout (one `key = value` per line, or CSV for sweep); diagnostics go
to stderr.  Exit codes: 0 success, 2 a numerical check failed, 3 invalid
input, 4 I/O error.

Options may also be supplied through a config file of `key = value` lines
(--config); explicit command-line flags override file values.  The thread
cap for BLAS-backed array work can be set with SADDLE_FORGE_THREADS (must
be exported before numpy is first imported, which the entry point ensures
by reading it at startup).
"""
from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_env():
    n = os.environ.get("SADDLE_FORGE_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, n)


_apply_thread_env()

import numpy as np  # noqa: E402  (after the thread cap)

from .errors import EXIT_INVALID_INPUT, EXIT_IO, EXIT_OK, SaddleForgeError  # noqa: E402
from .params import SurfaceParams  # noqa: E402
from .quad import DEFAULT_SPEC, QuadratureSpec  # noqa: E402


def _read_config(path):
    values = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"malformed config line: {line!r}")
                k, v = line.split("=", 1)
                values[k.strip().replace("-", "_")] = v.strip()
        return values
    except OSError as e:
        print(f"error: cannot read config {path}: {e}", file=sys.stderr)
        sys.exit(EXIT_IO)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        sys.exit(EXIT_INVALID_INPUT)


def _explicit_keys(argv):
    keys = set()
    for tok in argv:
        if tok.startswith("--"):
            keys.add(tok[2:].split("=", 1)[0].replace("-", "_"))
    return keys


def _merge_config(args, parser, argv):
    if getattr(args, "config", None):
        file_values = _read_config(args.config)
        explicit = _explicit_keys(argv)
        for k, v in file_values.items():
            if not hasattr(args, k):
                print(f"error: unknown config key {k!r}", file=sys.stderr)
                sys.exit(EXIT_INVALID_INPUT)
            # flags given on the command line override the file
            if k not in explicit:
                cur = getattr(args, k)
                cast = type(cur) if cur is not None else str
                if cast is bool:
                    setattr(args, k, v.lower() in ("1", "true", "yes"))
                else:
                    setattr(args, k, cast(v))
    return args


def _quad_spec(args) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=args.quad_rel_tol, abs_tol=args.quad_abs_tol,
                          max_refinement_levels=args.quad_levels)


def _emit(pairs):
    for k, v in pairs:
        if isinstance(v, float):
            print(f"{k} = {v:.17g}")
        else:
            print(f"{k} = {v}")


def _solved_params(args, spec):
    from .periods import solve_periods
    sol = solve_periods(args.t, args.X_offset, tol=args.tol, spec=spec)
    p = SurfaceParams(a=sol.a, b=sol.b, x=sol.a - args.t,
                      X=sol.a + args.X_offset, y=sol.y)
    return sol, p


def cmd_solve(args, parser):
    spec = _quad_spec(args)
    sol, _ = _solved_params(args, spec)
    rep = sol.report
    _emit([("t", sol.t), ("X_offset", sol.X_offset), ("a", sol.a),
           ("b", sol.b), ("y", sol.y), ("r", rep.r), ("R", rep.R),
           ("I", rep.I), ("J", rep.J), ("K", rep.K),
           ("pi1", rep.pi1), ("pi2", rep.pi2)])
    return EXIT_OK


def cmd_periods(args, parser):
    from .periods import period_report, resolve_params
    spec = _quad_spec(args)
    p = resolve_params(args.t, args.X_offset, args.a, args.b)
    rep = period_report(args.t, args.X_offset, args.a, args.b, spec)
    _emit([("a", p.a), ("b", p.b), ("y", p.y), ("r", rep.r), ("R", rep.R),
           ("I", rep.I), ("J", rep.J), ("K", rep.K),
           ("pi1", rep.pi1), ("pi2", rep.pi2),
           ("F_residual", rep.F_residual)])
    return EXIT_OK


def cmd_mesh(args, parser):
    from .mesh import assemble, build_grid, export_obj, integrate_piece
    spec = _quad_spec(args)
    sol, p = _solved_params(args, spec)
    grid = build_grid(p, args.resolution, far_radius=args.far_radius)
    piece = integrate_piece(grid, lc_tol=args.lc_tol)
    rep = sol.report
    if args.piece_only:
        out_mesh = piece
    else:
        out_mesh = assemble(piece, n_periods=args.n_periods)
    try:
        export_obj(out_mesh, args.output, pi1=rep.pi1, pi2=rep.pi2,
                   comment=f"t={sol.t:.17g} X_offset={sol.X_offset:.17g} "
                           f"resolution={args.resolution} T={piece.T:.17g}")
    except OSError as e:
        print(f"error: cannot write {args.output}: {e}", file=sys.stderr)
        return EXIT_IO
    _emit([("vertices", len(out_mesh.vertices)), ("faces", len(out_mesh.faces)),
           ("T", piece.T), ("lc_max", float(np.max(piece.loop_residuals))),
           ("output", args.output)])
    return EXIT_OK


def cmd_verify(args, parser):
    from .mesh import assemble, build_grid, integrate_piece
    from .verify import (case_diagnostics, check_injectivity,
                         check_profile_bell, check_self_intersections,
                         check_symmetry_table, degree_diagnostic)
    from .errors import NotApplicable
    spec = _quad_spec(args)
    sol, p = _solved_params(args, spec)
    results = []

    rep = check_symmetry_table(p, tol=args.symmetry_tol)
    results.extend(rep.results)

    dd = degree_diagnostic(p)
    from .verify import CheckResult
    results.append(CheckResult("gauss_degree", dd["degree"] == 5,
                               dd["degree"], str(dd["windings"])))

    piece = integrate_piece(build_grid(p, args.resolution,
                                       far_radius=args.far_radius))
    results.append(check_injectivity(piece.vertices, n_pairs=args.n_pairs,
                                     seed=args.seed))
    try:
        results.append(check_profile_bell(piece))
    except NotApplicable as e:
        print(f"profile_bell: skipped ({e})", file=sys.stderr)

    if not args.skip_intersections:
        asm = assemble(piece, n_periods=2)
        results.append(check_self_intersections(asm.vertices, asm.faces))

    diag = case_diagnostics(p)
    print(f"diagnostics: discriminant={diag['discriminant']:.6g} "
          f"conjugate_quadruple={diag['conjugate_quadruple']} "
          f"theta_outer_range={diag['theta_outer_range']}", file=sys.stderr)

    ok = True
    for r in results:
        _emit([(f"check[{r.name}]", "pass" if r.passed else "FAIL")])
        if not r.passed:
            ok = False
            print(f"FAIL {r.name}: value={r.value} {r.detail}", file=sys.stderr)
    _emit([("verified", int(ok))])
    return EXIT_OK if ok else 2


def cmd_sweep(args, parser):
    from .periods import sweep_family, write_sweep_csv
    spec = _quad_spec(args)
    if args.fig6:
        return _sweep_fig6(args, spec)
    t_grid = np.linspace(args.t_min, args.t_max, args.n_t)
    X_grid = np.linspace(args.X_min, args.X_max, args.n_X) \
        if args.n_X > 1 else [args.X_offset]
    rows = sweep_family(t_grid, X_grid, spec=spec, tol=args.tol)
    try:
        write_sweep_csv(rows, args.output)
    except OSError as e:
        print(f"error: cannot write {args.output}: {e}", file=sys.stderr)
        return EXIT_IO
    n_ok = sum(1 for (_, _, s) in rows if s is not None)
    print(f"{n_ok}/{len(rows)} solves converged", file=sys.stderr)
    _emit([("rows", len(rows)), ("converged", n_ok), ("output", args.output)])
    return EXIT_OK if n_ok == len(rows) else 2


def _sweep_fig6(args, spec):
    """Raw period-residual landscape: pi1 and pi2 over an (a, b) grid at
    fixed family coordinates, for contour plotting of the two zero sets."""
    import csv

    from .periods import (DEFAULT_SEED_BOX, period_report_for,
                          resolve_params)
    a_lo, a_hi, b_lo, b_hi = DEFAULT_SEED_BOX
    a_grid = np.linspace(a_lo, a_hi, args.n_a)
    b_grid = np.linspace(b_lo, b_hi, args.n_b)
    n_ok = 0
    try:
        with open(args.output, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["a", "b", "y", "pi1", "pi2", "ok"])
            for a in a_grid:
                for b in b_grid:
                    try:
                        p = resolve_params(args.t, args.X_offset, a, b)
                        rep = period_report_for(p, spec)
                        wr.writerow([f"{v:.17g}" for v in
                                     (a, b, p.y, rep.pi1, rep.pi2)] + ["1"])
                        n_ok += 1
                    except SaddleForgeError:
                        wr.writerow([f"{a:.17g}", f"{b:.17g}", "", "", "", "0"])
    except OSError as e:
        print(f"error: cannot write {args.output}: {e}", file=sys.stderr)
        return EXIT_IO
    total = len(a_grid)*len(b_grid)
    print(f"{n_ok}/{total} grid points evaluated", file=sys.stderr)
    _emit([("rows", total), ("evaluated", n_ok), ("output", args.output)])
    return EXIT_OK


def _add_common(sp):
    sp.add_argument("--config", help="key = value option file; flags override")
    sp.add_argument("--t", type=float, default=0.02,
                    help="family parameter t = a - x")
    sp.add_argument("--X-offset", dest="X_offset", type=float, default=0.0,
                    help="family parameter X - a")
    sp.add_argument("--tol", type=float, default=1e-10,
                    help="period-solver residual tolerance")
    sp.add_argument("--quad-rel-tol", type=float, default=DEFAULT_SPEC.rel_tol)
    sp.add_argument("--quad-abs-tol", type=float, default=DEFAULT_SPEC.abs_tol)
    sp.add_argument("--quad-levels", type=int,
                    default=DEFAULT_SPEC.max_refinement_levels)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="saddle-forge",
        description="construct and verify singly periodic genus-two "
                    "saddle towers from explicit curve data")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve the three period problems")
    _add_common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("periods",
                        help="period report at explicit (a, b) without solving")
    _add_common(sp)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.set_defaults(fn=cmd_periods)

    sp = sub.add_parser("mesh", help="solve, mesh, assemble, export OBJ")
    _add_common(sp)
    sp.add_argument("--resolution", type=int, default=64)
    sp.add_argument("--far-radius", type=float, default=20.0)
    sp.add_argument("--lc-tol", type=float, default=1e-8,
                    help="loop-closure tolerance relative to cell size")
    sp.add_argument("--n-periods", type=int, default=1)
    sp.add_argument("--piece-only", action="store_true",
                    help="export the fundamental piece instead of the tower")
    sp.add_argument("--output", "-o", default="tower.obj")
    sp.set_defaults(fn=cmd_mesh)

    sp = sub.add_parser("verify", help="run the verification checks")
    _add_common(sp)
    sp.add_argument("--resolution", type=int, default=64)
    sp.add_argument("--far-radius", type=float, default=20.0)
    sp.add_argument("--symmetry-tol", type=float, default=1e-9)
    sp.add_argument("--n-pairs", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=20260823)
    sp.add_argument("--skip-intersections", action="store_true")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("sweep", help="solve the family over a parameter grid")
    _add_common(sp)
    sp.add_argument("--t-min", type=float, default=0.01)
    sp.add_argument("--t-max", type=float, default=0.05)
    sp.add_argument("--n-t", type=int, default=5)
    sp.add_argument("--fig6", action="store_true",
                    help="emit the raw pi1/pi2 landscape over the (a, b) "
                         "window at fixed (t, X_offset) for contour plotting")
    sp.add_argument("--X-min", type=float, default=0.0)
    sp.add_argument("--X-max", type=float, default=0.02)
    sp.add_argument("--n-X", type=int, default=1)
    sp.add_argument("--n-a", type=int, default=12,
                    help="fig6 grid size in a")
    sp.add_argument("--n-b", type=int, default=12,
                    help="fig6 grid size in b")
    sp.add_argument("--output", "-o", default="sweep.csv")
    sp.set_defaults(fn=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    args = _merge_config(args, parser, argv)
    try:
        code = args.fn(args, parser)
    except SaddleForgeError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        code = e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())

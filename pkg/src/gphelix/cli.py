"""Command-line front end: ``gphelix {profile,error,reduce,kmd}``.

Exit status 0 on success, 2 on bad arguments or violated preconditions,
3 on numerical failure (no convergence, no sign change, collision).
Results go to --out, else $GPHELIX_OUTPUT_DIR/<subcommand>, else
./gphelix_runs/<subcommand>.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC = 0, 2, 3


class NumericalFailure(RuntimeError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _pair(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return vals[0], vals[1]


def _outdir(args) -> Path:
    if args.out:
        base = Path(args.out)
    else:
        root = os.environ.get("GPHELIX_OUTPUT_DIR", "gphelix_runs")
        base = Path(root) / args.command
    base.mkdir(parents=True, exist_ok=True)
    return base


def _echo_config(out: Path, args):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    (out / "config.json").write_text(json.dumps({"schema_version": 1, **cfg}, indent=2, default=str))


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        wr.writerow(header)
        wr.writerows(rows)


# ------------------------------------------------------------- profile


def cmd_profile(args) -> int:
    from .vortex_profile import ProfileSolveError, profile_residual, save_profile, solve_profile, tail_law_table

    if args.rcut < 20:
        raise ValueError(f"--rcut must be at least 20, got {args.rcut}")
    try:
        prof = solve_profile(R_cut=args.rcut, tol=args.tol)
    except ProfileSolveError as exc:
        raise NumericalFailure(str(exc)) from exc
    out = _outdir(args)
    _echo_config(out, args)
    save_profile(prof, out / "profile.csv")
    radii, values = tail_law_table(prof)
    table = list(zip(radii.tolist(), values.tolist()))
    summary = {
        "schema_version": 1,
        "alpha": prof.alpha,
        "R_cut": prof.R_cut,
        "residual": profile_residual(prof),
        "tail_law": {str(r): v for r, v in table},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(f"alpha = {prof.alpha:.15f}  residual = {summary['residual']:.3e}")
    if args.check_tail:
        print("r      r^4 |rho - 1 + 1/(2 r^2)|")
        for r, v in table:
            print(f"{r:<6g} {v:.6f}")
    print(f"wrote {out}")
    return EXIT_OK


# --------------------------------------------------------------- error


def cmd_error(args) -> int:
    from . import error_analysis as ea
    from . import gp_operators as go
    from .ansatz import eval_Vd, make_config
    from .vortex_profile import default_profile

    cfgs = [make_config(args.n, args.nminus, e, args.c, args.dhat) for e in args.eps]
    prof = default_profile()
    out = _outdir(args)
    _echo_config(out, args)
    rows = []
    for cfg in cfgs:
        par = go.OperatorParams.from_config(cfg, order=args.order)
        angles = np.linspace(0, 2 * np.pi, args.points, endpoint=False) + 0.1
        pts = cfg.positions[0] + args.radius * np.exp(1j * angles)
        for p in pts:
            fld = go.stencil_patch(p, args.h, args.order)
            fld = fld.with_values(eval_Vd(cfg, prof, fld.points))
            fd = [go.at_centre(x) for x in go.apply_S_parts(fld, par)]
            row = [cfg.eps, p.real, p.imag] + [v for x in fd for v in (x.real, x.imag)]
            if not args.oracle_only:
                cf = [ea.closed_form_Ea(cfg, prof, p), ea.closed_form_Eb(cfg, prof, p), ea.closed_form_Ec(cfg, prof, p)]
                row += [v for x in cf for v in (x.real, x.imag)]
            rows.append(row)
    header = ["eps", "x1", "x2", "Re_Sa_fd", "Im_Sa_fd", "Re_Sb_fd", "Im_Sb_fd", "Re_Sc_fd", "Im_Sc_fd"]
    if not args.oracle_only:
        header += ["Re_Ea", "Im_Ea", "Re_Eb", "Im_Eb", "Re_Ec", "Im_Ec"]
    _write_csv(out / "comparison.csv", header, rows)
    if not args.oracle_only:
        srows = []
        for cfg in cfgs:
            rep = ea.norm_star_star(ea.error_R(cfg, prof), cfg, prof)
            srows.append([cfg.eps, rep.value, rep.value * cfg.log_eps])
            print(f"eps = {cfg.eps:.1e}  ||R||_** = {rep.value:.5g}  ratio (times |log eps|) = {rep.value * cfg.log_eps:.5g}")
        _write_csv(out / "scaling.csv", ["eps", "norm_R", "ratio"], srows)
    print(f"wrote {out}")
    return EXIT_OK


# -------------------------------------------------------------- reduce


def cmd_reduce(args) -> int:
    from . import reduction as rd
    from .ansatz import make_config
    from .vortex_profile import default_profile

    if args.theorem == 2:
        n_plus, n_minus = (args.nplus or 5), 1
        bracket = args.bracket or (0.8, 3.0)
    else:
        n_plus, n_minus = (args.nplus or args.n), 0
        bracket = args.bracket or (0.5, 3.0)
    prof = default_profile()
    make_config(n_plus, n_minus, args.eps[0], args.c, bracket[0])
    out = _outdir(args)
    _echo_config(out, args)
    sweep = []
    target = rd.asymptotic_root(n_plus, n_minus, args.c)
    for eps in args.eps:
        try:
            root = rd.solve_dhat(n_plus, n_minus, args.c, eps, bracket, prof)
        except rd.BracketError as exc:
            print(f"no sign change at eps={eps:g}: balance(lo)={exc.values[0]:.6g}, balance(hi)={exc.values[1]:.6g}")
            raise NumericalFailure(str(exc)) from exc
        except rd.QuadratureError as exc:
            raise NumericalFailure(str(exc)) from exc
        cfg = make_config(n_plus, n_minus, eps, args.c, root)
        rep = rd.reduction_report(cfg, prof, d_samples=np.linspace(*bracket, 5))
        rep.d_hat_root = root
        rep.to_json(out / f"report_eps{eps:.0e}.json")
        gap = abs(root - target) / target
        sweep.append([eps, args.c, n_plus, n_minus, root, target, gap])
        print(f"eps = {eps:.1e}  root d_hat = {root:.5f}  asymptotic = {target:.5f}  relative gap = {gap:.4f}")
    _write_csv(out / "sweep.csv", ["eps", "c", "n_plus", "n_minus", "root", "asymptotic_root", "gap"], sweep)
    print(f"wrote {out}")
    return EXIT_OK


# ----------------------------------------------------------------- kmd


def cmd_kmd(args) -> int:
    from . import kmd_sim as km

    n = args.N or args.n or (5 if args.family == "central-minus" else 3)
    out = _outdir(args)
    _echo_config(out, args)
    try:
        if args.verify:
            state = km.helix_exact(n, args.nu, 0.0, args.M, args.family)
            res = km.helix_residual(state, args.nu)
            print(f"helix residual = {res:.3e}")
            (out / "verify.json").write_text(json.dumps({"schema_version": 1, "residual": res}, indent=2))
        if args.perturb is not None or not args.verify:
            rep, traj = km.relative_equilibrium_check(
                n, args.nu, args.T, args.dt, args.M, args.perturb or 0.0, args.family, args.seed
            )
            rep.to_json(out / "report.json")
            km.export_trajectory_csv(traj, out / "trajectory.csv")
            print(f"max deviation = {rep.max_deviation:.3e}  nu measured = {rep.nu_measured:.8f}")
            if rep.growth_factor is not None:
                print(f"growth factor = {rep.growth_factor:.4g}  fitted rate = {rep.growth_rate:.4g}")
    except km.CollisionError as exc:
        raise NumericalFailure(str(exc)) from exc
    print(f"wrote {out}")
    return EXIT_OK


# -------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gphelix", description="Helical vortex filaments in the Gross-Pitaevskii equation")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="seed for random perturbations")

    sp = sub.add_parser("profile", help="solve the radial vortex profile")
    sp.add_argument("--rcut", type=float, default=40.0)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--check-tail", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("error", help="closed-form vs finite-difference error and its norm scaling")
    sp.add_argument("--n", type=int, default=2, help="number of degree +1 vortices")
    sp.add_argument("--nminus", type=int, default=0)
    sp.add_argument("--c", type=float, default=0.0)
    sp.add_argument("--eps", type=_floats, default=[1e-2, 1e-3, 1e-4])
    sp.add_argument("--dhat", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=0.01, help="finite-difference step")
    sp.add_argument("--order", type=int, choices=(2, 4), default=2)
    sp.add_argument("--radius", type=float, default=3.0, help="distance of test points from the first vortex")
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--oracle-only", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_error)

    sp = sub.add_parser("reduce", help="projection coefficients and the radius balance")
    sp.add_argument("--theorem", type=int, choices=(1, 2), default=1, help="1: ring of +1 vortices, 2: ring plus a central -1 vortex")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--nplus", type=int, default=None)
    sp.add_argument("--c", type=float, default=0.0)
    sp.add_argument("--eps", type=_floats, default=[1e-4])
    sp.add_argument("--bracket", type=_pair, default=None)
    common(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("kmd", help="helix relative equilibria of the filament system")
    sp.add_argument("--family", choices=("polygon", "central-minus"), default="polygon")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--N", type=int, default=None)
    sp.add_argument("--nu", type=float, default=0.0)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--perturb", type=float, default=None)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--M", type=int, default=64)
    common(sp)
    sp.set_defaults(func=cmd_kmd)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())

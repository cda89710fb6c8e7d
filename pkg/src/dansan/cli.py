"""Command-line entry point: ``dansan {optimize,sweep,validate,outage}``.

Powers on the command line and in outputs are in milliwatts.
Exit codes: 0 ok, 1 usage/config error, 2 infeasible, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import mc, optimizer, outage
from .config import ConfigError, SystemParams, load_params, validate
from .sweep import (SweepSpec, channel_draw, config_hash, plot_script, rows_to_csv,
                    run_sweep, solve)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_VALIDATION = 0, 1, 2, 3
CONFIG_ENV = "DANSAN_CONFIG"
MW = 1e-3

_SWEEP_VARS = {"beta": "beta", "n_e": "n_e", "antennas": "antennas", "eve-x": "eve_x",
               "dan-cap": "dan_cap", "gamma-b": "gamma_b", "gamma-e": "gamma_e"}


class UsageError(Exception):
    pass


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help=f"key = value file (default: ${CONFIG_ENV} or built-in)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--convention", choices=("paper", "unit"),
                        help="chi-squared convention for the DAN gain")
    parser.add_argument("--beta", type=float, help="override the outage target")
    parser.add_argument("--gamma-b", type=float, help="override Bob's SNR target")
    parser.add_argument("--gamma-e", type=float, help="override Eve's SNR threshold")
    parser.add_argument("--n-e", type=int, help="override Eve's antenna count")
    parser.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dansan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="minimum-power allocation averaged over channel draws")
    _common(p)
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--san-only", action="store_true", help="source noise only (no DAN)")
    p.add_argument("--dan-cap", type=float, help="DAN power limit in mW")
    p.add_argument("--verbose", action="store_true", help="also print every draw")

    p = sub.add_parser("sweep", help="parameter sweep written as CSV")
    _common(p)
    p.add_argument("--sweep-var", required=True, choices=sorted(_SWEEP_VARS))
    p.add_argument("--values", required=True,
                   help="comma list; antennas as NAxNB pairs, dan-cap in mW, eve-x in m")
    p.add_argument("--draws", type=int, default=200)
    p.add_argument("--dan-cap", type=float, help="DAN power limit (mW) for the dan_san rows")
    p.add_argument("--fixed-channel", action="store_true",
                   help="reuse one H_AB draw instead of averaging")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot-script", help="also write a gnuplot script here")

    p = sub.add_parser("validate", help="closed form vs Monte Carlo on a 20-point grid")
    _common(p)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--analytic-convention", choices=("paper", "unit"),
                   help="evaluate the closed form under another convention (negative control)")
    p.add_argument("--no-eve-noise", action="store_true",
                   help="drop Eve's receiver noise from her SNR denominator")

    p = sub.add_parser("outage", help="analytic and Monte Carlo outage for one allocation")
    _common(p)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--p-src", type=float, required=True, help="source power in mW")
    p.add_argument("--p-dan", type=float, default=0.0, help="DAN power in mW")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--geometry", choices=mc.GEOMETRIES, default="fixed_mean_distances")
    return parser


def resolve_params(args) -> SystemParams:
    path = args.config or os.environ.get(CONFIG_ENV)
    params = load_params(Path(path).read_text(encoding="utf-8")) if path else SystemParams()
    changes = {}
    for attr, key in (("convention", "chi_convention"), ("beta", "beta"),
                      ("gamma_b", "gamma_b"), ("gamma_e", "gamma_e"), ("n_e", "n_e")):
        v = getattr(args, attr, None)
        if v is not None:
            changes[key] = v
    if getattr(args, "dan_cap", None) is not None:
        changes["dan_cap"] = args.dan_cap * MW
    params = params.replace(**changes)
    # beta >= 1 from a flag is an infeasible request, reported by the solver
    errors = validate(params.replace(beta=0.5) if params.beta >= 1 else params)
    if errors:
        raise ConfigError(errors)
    return params


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_optimize(args) -> int:
    params = resolve_params(args)
    if args.draws < 1:
        raise UsageError("--draws must be >= 1")
    method = "san_only" if args.san_only else "dan_san"
    try:
        reports = [solve(params, channel_draw(params, args.seed, d), method)
                   for d in range(args.draws)]
    except optimizer.InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    ok = [r for r in reports if r.feasible]
    buf = io.StringIO()
    buf.write(f"draws: {args.draws}\nseed: {args.seed}\n")
    buf.write(f"feasible: {len(ok)}/{len(reports)}\n")
    if ok:
        allocs = [r.allocation for r in ok]

        def mean_mw(attr):
            return float(np.mean([getattr(a, attr) for a in allocs])) / MW

        buf.write(f"total_an_mw: {mean_mw('an_power'):.9g}\n")
        buf.write(f"p_dan_mw: {mean_mw('p_dan'):.9g}\n")
        buf.write(f"p_san_mw: {mean_mw('san_power'):.9g}\n")
        buf.write(f"p_data_mw: {mean_mw('data_power'):.9g}\n")
        buf.write(f"total_mw: {mean_mw('total'):.9g}\n")
        buf.write(f"phi: {float(np.mean([a.phi for a in allocs])):.9g}\n")
        buf.write(f"min_slack_bob: {min(r.constraint_slack_bob for r in ok):.3e}\n")
        buf.write(f"min_slack_eve: {min(r.constraint_slack_eve for r in ok):.3e}\n")
    if args.verbose:
        buf.write("draw,feasible,p_dan_mw,p_san_mw,phi\n")
        for d, r in enumerate(reports):
            if r.feasible:
                a = r.allocation
                buf.write(f"{d},true,{a.p_dan / MW:.9g},{a.san_power / MW:.9g},{a.phi:.9g}\n")
            else:
                buf.write(f"{d},false,,,\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if len(ok) == len(reports) else EXIT_INFEASIBLE


def parse_values(variable: str, text: str) -> tuple:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError("--values is empty")
    try:
        if variable == "antennas":
            return tuple(tuple(int(x) for x in t.lower().split("x")) for t in items)
        if variable == "n_e":
            return tuple(int(t) for t in items)
        if variable == "dan_cap":
            return tuple(float(t) * MW for t in items)
        return tuple(float(t) for t in items)
    except ValueError as exc:
        raise UsageError(f"bad --values entry: {exc}") from None


def cmd_sweep(args) -> int:
    params = resolve_params(args)
    variable = _SWEEP_VARS[args.sweep_var]
    values = parse_values(variable, args.values)
    try:
        spec = SweepSpec(variable, values, args.draws, args.seed, args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        rows = run_sweep(spec, params, workers=args.workers, fixed_channel=args.fixed_channel)
    except optimizer.InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(rows_to_csv(rows, params, spec), args.out)
    if args.plot_script:
        Path(args.plot_script).write_text(plot_script(args.out or "sweep.csv", spec),
                                          encoding="utf-8")
    return EXIT_OK


def cmd_validate(args) -> int:
    params = resolve_params(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rows = mc.validate_closed_form(params, mc.default_grid(params), trials=args.trials,
                                   seed=args.seed, workers=args.workers,
                                   analytic_convention=args.analytic_convention,
                                   eve_noise=not args.no_eve_noise)
    buf = io.StringIO()
    buf.write(f"# config_sha256={config_hash(params)} seed={args.seed} trials={args.trials}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phi", "p_src_mw", "p_dan_mw", "analytic", "estimate", "stderr", "z", "flagged"])
    for r in rows:
        a = r.allocation
        w.writerow([f"{a.phi:g}", f"{a.p_src / MW:.9g}", f"{a.p_dan / MW:g}",
                    f"{r.analytic:.9g}", f"{r.estimate:.9g}", f"{r.stderr:.3g}",
                    f"{r.z:.3f}", "true" if r.flagged else "false"])
    _emit(buf.getvalue(), args.out)
    return EXIT_VALIDATION if any(r.flagged for r in rows) else EXIT_OK


def cmd_outage(args) -> int:
    params = resolve_params(args)
    try:
        alloc = optimizer.PowerAllocation(args.p_dan * MW, args.p_src * MW, args.phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    analytic = outage.outage_probability(alloc, params)
    est = mc.estimate_outage(alloc, params, geometry=args.geometry,
                             trials=args.trials, seed=args.seed)
    z = mc.z_score(analytic, est)
    text = (f"analytic: {analytic:.9g}\nmonte_carlo: {est.estimate:.9g}\n"
            f"stderr: {est.stderr:.3g}\ntrials: {est.trials}\n"
            f"z: {z:.3f}\ngeometry: {args.geometry}\n")
    if not math.isfinite(z):
        text += "z: undefined (analytic probability is 0 or 1)\n"
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {"optimize": cmd_optimize, "sweep": cmd_sweep,
            "validate": cmd_validate, "outage": cmd_outage}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

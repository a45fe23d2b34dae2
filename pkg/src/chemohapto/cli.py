"""Command-line entry point: threshold, simulate, sweep, converge, verify."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import E_HYPOTHESIS, ConfigError, build_problem, load_config, parse_config
from .threshold import ThresholdInputs, kappa, m_critical

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_HYPOTHESIS = 4

HEAT_PRESET = """
[model]
chi = 0
xi = 0
mu = 0
[diffusivity]
m = 1
[grid]
cells = 16
[solver]
t_end = 1
"""
FULL_PRESET = """
[grid]
cells = 16
[solver]
t_end = 1
"""


def _resolve(args, check: bool = True) -> dict:
    overrides = list(args.override)
    if args.deterministic:
        overrides.append("run.deterministic = true")
    if args.config:
        return load_config(args.config, overrides, check)
    return parse_config("", overrides, check)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--deterministic", action="store_true",
                   help="record deterministic mode in the manifest")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")


def cmd_threshold(args) -> int:
    kap = None
    if args.config or args.override:
        r = _resolve(args)
        p = build_problem(r)
        w0 = p.initial.w
        inputs = ThresholdInputs(p.grid.dim, p.sens.chi, p.sens.xi, p.sens.mu,
                                 float(np.max(w0)), p.lambda0)
        m = p.spec.m if args.m is None else args.m
        kap = kappa(p.grid, w0)
    else:
        inputs = ThresholdInputs(args.N, args.chi, args.xi, args.mu, args.w0_sup, args.lambda0)
        m = args.m
    report = m_critical(inputs, m=m, kappa=kap)
    print(report.to_json() if args.json else report.to_text())
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .diagnostics import DiagnosticsContext
    from .io import emit_outputs
    from .solver import run

    r = _resolve(args)
    p = build_problem(r)
    ctx = DiagnosticsContext.from_initial(p.grid, p.initial, p.sens, p.k_exponents, p.betas)
    res = run(p.initial, p.grid, p.spec, p.sens, p.solver, ctx,
              keep_snapshots=r["run.snapshots"])
    out = Path(args.out or r["run.id"])
    emit_outputs(res, p, out)
    print(f"status={res.status} t={res.final.t:.6g} steps={res.steps} "
          f"sup|u|_inf={res.sup_linf_u:.6g} out={out}")
    if res.message:
        print(res.message, file=sys.stderr)
    return EXIT_OK if res.status in ("completed", "aborted_blowup") else EXIT_SOLVER


def cmd_sweep(args) -> int:
    from .config import serialize_config
    from .harness import SweepSpec, run_sweep

    r = _resolve(args)
    out = Path(args.out or f"{r['run.id']}_sweep")
    out.mkdir(parents=True, exist_ok=True)
    spec = SweepSpec.from_config(r, out_dir=out / "runs")
    (out / "sweep_manifest.txt").write_text(serialize_config(r))
    res = run_sweep(spec, out / "results.csv")
    for status in ("bounded", "unbounded", "aborted_blowup", "aborted_dt", "incomplete"):
        n = len(res.by_status(status))
        if n:
            print(f"{status}: {n}")
    return EXIT_OK if res.all_completed else EXIT_SOLVER


def cmd_converge(args) -> int:
    from .harness import convergence_study, observed_order, write_convergence_csv

    if args.config:
        r = _resolve(args, check=False)
    else:
        preset = HEAT_PRESET if args.preset == "heat" else FULL_PRESET
        overrides = list(args.override) + (["run.deterministic = true"] if args.deterministic else [])
        r = parse_config(preset, overrides, check=False)
    rows = convergence_study(r, levels=args.levels, t_out=args.t_out)
    print(f"{'level':>5} {'cells':>10} {'h':>10} {'dt':>10} {'err_l1':>12} {'err_linf':>12} "
          f"{'order_l1':>9} {'order_linf':>10}")
    for row in rows:
        o1 = "" if row.order_l1 is None else f"{row.order_l1:.3f}"
        oi = "" if row.order_linf is None else f"{row.order_linf:.3f}"
        print(f"{row.level:>5} {'x'.join(map(str, row.cells)):>10} {row.h:>10.4g} {row.dt:>10.3g} "
              f"{row.err_l1:>12.4e} {row.err_linf:>12.4e} {o1:>9} {oi:>10} {row.warning}")
    print(f"observed order: l1 {observed_order(rows, 'l1'):.3f}, "
          f"linf {observed_order(rows, 'linf'):.3f}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_convergence_csv(Path(args.out) / "convergence.csv", rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verify, write_verify_csv

    rows = run_verify(overrides=args.override)
    for row in rows:
        mark = "PASS" if row.passed else "FAIL"
        print(f"{mark} {row.name:<22} steps={row.steps:<5} hard={row.hard_violations} "
              f"mass_res={row.max_mass_residual:.2e} l1_ok={row.l1_ok} "
              f"w_err={row.w_exactness_err:.2e}")
    n_fail = sum(not r.passed for r in rows)
    print(f"{len(rows) - n_fail}/{len(rows)} configurations passed")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_verify_csv(Path(args.out) / "verify.csv", rows)
    return EXIT_OK if n_fail == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemohapto", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="print the critical diffusion exponent")
    _common(p)
    p.add_argument("--N", type=int, default=2, help="space dimension")
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--w0-sup", type=float, default=1.0)
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--m", type=float, default=None, help="exponent to test for admissibility")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("simulate", help="run one simulation and write its outputs")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a parameter sweep (resumes an existing results.csv)")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("converge", help="grid refinement study")
    _common(p)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--t-out", type=float, default=None)
    p.add_argument("--preset", choices=("heat", "full"), default="heat",
                   help="built-in configuration used when --config is absent")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("verify", help="run the invariant suite on canned configurations")
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS if exc.code == E_HYPOTHESIS else EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

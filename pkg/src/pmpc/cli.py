"""Command line interface: ``pmpc simulate | sweep | pf-check``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import PmpcError
from .harness import RunConfig, pf_check, run_closed_loop, run_sweep

_INT_AXES = {"N", "horizon", "N_p", "particles", "N_s", "scenarios", "seed"}


def _parse_values(axis: str, raw: str) -> list:
    parse = int if axis in _INT_AXES else float
    return [parse(item) for item in raw.split(",") if item.strip() != ""]


def _cmd_simulate(args) -> int:
    cfg = RunConfig.from_file(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace, metrics = run_closed_loop(cfg)
    trace.write_csv(out / "trace.csv")
    with open(out / "metrics.json", "w") as fh:
        json.dump(metrics.to_dict(), fh, indent=2, sort_keys=True)
    print(
        f"simulated {metrics.steps} steps (seed {metrics.seed}): "
        f"{metrics.violation_count} constraint violations, "
        f"total realized cost {metrics.total_realized_cost:.1f} "
        f"-> {out / 'trace.csv'}"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = RunConfig.from_file(args.config)
    values = _parse_values(args.axis, args.values)
    summary = run_sweep(
        cfg,
        args.axis,
        values,
        repeats=args.repeats,
        workers=args.workers,
        out_dir=args.out,
    )
    for entry in summary["values"]:
        vc, tc = entry["violation_count"], entry["total_realized_cost"]
        print(
            f"{summary['axis']}={entry['value']}: violations "
            f"mean {vc['mean']:.2f} (min {vc['min']}, max {vc['max']}), "
            f"cost mean {tc['mean']:.1f}"
        )
    print(f"summary -> {Path(args.out) / 'summary.json'}")
    return 0


def _cmd_pf_check(args) -> int:
    report = pf_check(args.out, seed=args.seed)
    print(
        f"particle filter vs exact filter on {report['model']}: "
        f"mean |error| {report['mean_abs_error']:.4f} "
        f"(tol {report['mean_abs_error_tolerance']}), "
        f"variance rel. error {report['var_rel_error']:.4f} "
        f"(tol {report['var_rel_error_tolerance']}), "
        f"{report['runtime_seconds']:.2f}s"
    )
    print("PASS" if report["passed"] else "FAIL")
    return 0 if report["passed"] else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmpc",
        description="Particle-filter state estimation with scenario-based receding-horizon control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one closed-loop simulation")
    sim.add_argument("--config", required=True, help="JSON run configuration")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--out", default=".", help="output directory (trace.csv, metrics.json)")
    sim.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("sweep", help="run repeated simulations along a parameter axis")
    sweep.add_argument("--config", required=True, help="JSON base configuration")
    sweep.add_argument("--axis", required=True, help="N | N_p | N_s | epsilon | seed")
    sweep.add_argument("--values", required=True, help="comma-separated axis values")
    sweep.add_argument("--repeats", type=int, default=1, help="seeds per value")
    sweep.add_argument("--workers", type=int, default=1, help="concurrent runs")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.set_defaults(func=_cmd_sweep)

    check = sub.add_parser("pf-check", help="score the particle filter against the exact filter")
    check.add_argument("--out", default=None, help="directory for pf_check.json")
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(func=_cmd_pf_check)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PmpcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

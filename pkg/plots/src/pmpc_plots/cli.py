"""Command line entry points: ``render-run`` and ``render-sweep``."""

from __future__ import annotations

import argparse
import sys

from .figures import render_run, render_sweep
from .traces import SchemaError, load_summary, load_trace


def main_run(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-run",
        description="Render a simulation trace.csv into a three-panel figure.",
    )
    parser.add_argument("--trace", required=True, help="path to trace.csv")
    parser.add_argument("--out", required=True, help="output image path (e.g. fig.png)")
    parser.add_argument("--floor", type=float, default=1.0, help="state constraint level")
    parser.add_argument("--control-bound", type=float, default=5.0, help="control box bound")
    args = parser.parse_args(argv)
    try:
        trace = load_trace(args.trace)
        out = render_run(trace, args.out, state_floor=args.floor, control_bound=args.control_bound)
    except (FileNotFoundError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def main_sweep(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-sweep",
        description="Render a sweep summary.json into a comparison chart.",
    )
    parser.add_argument("--summary", required=True, help="path to summary.json")
    parser.add_argument("--out", required=True, help="output image path (e.g. fig.png)")
    args = parser.parse_args(argv)
    try:
        summary = load_summary(args.summary)
        out = render_sweep(summary, args.out)
    except (FileNotFoundError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0

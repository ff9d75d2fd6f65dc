"""Figure rendering from validated trace and summary data.

Styling follows the simulator's conventions: measured quantities in blue,
constraint levels in red, the filter's 95% band in black/gray. Output is
deterministic - fixed geometry, no timestamps - so identical inputs give
byte-identical images.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .traces import TraceFile

_SAVE_KWARGS = dict(dpi=120, metadata={"Software": None})


def render_run(
    trace: TraceFile,
    out,
    state_floor: float = 1.0,
    control_bound: float = 5.0,
) -> Path:
    """Three stacked panels: state with constraint and filter band, control, measurement.

    An empty trace (header only) produces an empty-axes figure with a
    warning rather than an error.
    """
    out = Path(out)
    if len(trace) == 0:
        warnings.warn(f"{trace.path}: trace has no rows, rendering empty axes", stacklevel=2)

    t = trace["t"]
    fig, (ax_state, ax_control, ax_meas) = plt.subplots(
        3, 1, sharex=True, figsize=(8, 8), constrained_layout=True
    )

    ax_state.fill_between(
        t, trace["pf_q025"], trace["pf_q975"], color="0.8", label="filter 95% band"
    )
    ax_state.plot(t, trace["pf_q025"], color="black", linewidth=0.8)
    ax_state.plot(t, trace["pf_q975"], color="black", linewidth=0.8)
    ax_state.plot(t, trace["x_true"], color="tab:blue", marker=".", label="true state")
    ax_state.axhline(state_floor, color="tab:red", linewidth=1.2, label="state floor")
    ax_state.set_ylabel("state")
    ax_state.legend(loc="upper right", fontsize=8)

    ax_control.step(t, trace["u"], where="post", color="tab:blue", marker=".")
    ax_control.axhline(control_bound, color="tab:red", linewidth=1.2)
    ax_control.axhline(-control_bound, color="tab:red", linewidth=1.2)
    ax_control.set_ylabel("control")

    ax_meas.plot(t, trace["y"], color="tab:blue", marker=".")
    ax_meas.set_ylabel("measurement")
    ax_meas.set_xlabel("step")

    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **_SAVE_KWARGS)
    plt.close(fig)
    return out


def render_sweep(summary: dict, out) -> Path:
    """Violation counts and realized cost vs the swept parameter.

    Bars show per-value means with min/max whiskers over the repeats.
    """
    out = Path(out)
    entries = summary["values"]
    labels = [str(entry["value"]) for entry in entries]
    positions = range(len(entries))

    fig, (ax_viol, ax_cost) = plt.subplots(
        2, 1, sharex=True, figsize=(7, 6), constrained_layout=True
    )
    for ax, key, title in (
        (ax_viol, "violation_count", "constraint violations"),
        (ax_cost, "total_realized_cost", "total realized cost"),
    ):
        means = [entry[key]["mean"] for entry in entries]
        lo = [entry[key]["mean"] - entry[key]["min"] for entry in entries]
        hi = [entry[key]["max"] - entry[key]["mean"] for entry in entries]
        ax.bar(positions, means, yerr=[lo, hi], capsize=4, color="tab:blue")
        ax.set_ylabel(title)
    ax_cost.set_xticks(list(positions), labels)
    ax_cost.set_xlabel(summary["axis"])

    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **_SAVE_KWARGS)
    plt.close(fig)
    return out

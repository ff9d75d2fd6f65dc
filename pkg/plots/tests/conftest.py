import csv
import json
import math

import pytest

from pmpc_plots.traces import TRACE_COLUMNS


def synthetic_rows(steps=30):
    """A plausible 30-step record written straight against the file contract."""
    rows = []
    x = 1.5
    for t in range(steps):
        u = float((-1) ** t * (t % 6))
        y = x**3 - x + math.sin(3.1 * t)
        rows.append(
            {
                "t": t,
                "x_true": round(x, 6),
                "y": round(y, 6),
                "u": u,
                "pf_mean": round(x + 0.05 * math.sin(t), 6),
                "pf_q025": round(x - 0.4, 6),
                "pf_q975": round(x + 0.4, 6),
                "ess": 1000.0 - 7 * t,
                "stage_cost": round(100 * x * x + u * u, 6),
                "constraint_ok": int(x >= 1.0),
                "fallback_used": 0,
                "degenerate_flag": int(t == 17),
            }
        )
        x = max(0.8, 1.5 * x - 0.45 * x * abs(u) * 0.3 - 0.2) % 4 + 0.9
    return rows


def write_trace(path, rows, columns=TRACE_COLUMNS):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])
    return path


@pytest.fixture
def trace_path(tmp_path):
    return write_trace(tmp_path / "trace.csv", synthetic_rows())


@pytest.fixture
def summary_path(tmp_path):
    summary = {
        "axis": "scenarios",
        "repeats": 5,
        "base": {},
        "values": [
            {
                "value": 50,
                "violation_count": {"mean": 2.2, "min": 1, "max": 4},
                "total_realized_cost": {"mean": 41000.0, "min": 36000.0, "max": 52000.0},
                "runs": [],
            },
            {
                "value": 1000,
                "violation_count": {"mean": 0.6, "min": 0, "max": 2},
                "total_realized_cost": {"mean": 38000.0, "min": 33000.0, "max": 47000.0},
                "runs": [],
            },
        ],
    }
    path = tmp_path / "summary.json"
    path.write_text(json.dumps(summary))
    return path

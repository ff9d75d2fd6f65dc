"""Figure rendering for simulator trace.csv and summary.json files.

This package consumes only the documented file formats; it has no
dependency on the simulation library itself.
"""

from .figures import render_run, render_sweep
from .traces import TRACE_COLUMNS, SchemaError, TraceFile, load_summary, load_trace

__version__ = "0.1.0"

__all__ = [
    "TRACE_COLUMNS",
    "SchemaError",
    "TraceFile",
    "load_summary",
    "load_trace",
    "render_run",
    "render_sweep",
]

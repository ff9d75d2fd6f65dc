import pytest

from pmpc_plots import SchemaError, load_summary, load_trace, render_run, render_sweep
from pmpc_plots.cli import main_run, main_sweep
from pmpc_plots.traces import TRACE_COLUMNS

from conftest import synthetic_rows, write_trace

# ---------------------------------------------------------------------------
# Loaders
# ---------------------------------------------------------------------------


def test_load_trace_parses_all_columns(trace_path):
    trace = load_trace(trace_path)
    assert len(trace) == 30
    assert trace["t"] == list(range(30))
    assert isinstance(trace["x_true"][0], float)
    assert trace["degenerate_flag"][17] is True
    assert trace["fallback_used"][0] is False


@pytest.mark.parametrize("dropped", ["pf_q975", "u", "degenerate_flag"])
def test_missing_column_error_names_it(tmp_path, dropped):
    columns = tuple(c for c in TRACE_COLUMNS if c != dropped)
    rows = [{k: v for k, v in row.items() if k != dropped} for row in synthetic_rows(5)]
    path = write_trace(tmp_path / "partial.csv", rows, columns)
    with pytest.raises(SchemaError, match=dropped):
        load_trace(path)


def test_unknown_column_rejected(tmp_path):
    rows = synthetic_rows(3)
    for row in rows:
        row["extra"] = 1
    path = write_trace(tmp_path / "extra.csv", rows, TRACE_COLUMNS + ("extra",))
    with pytest.raises(SchemaError, match="extra"):
        load_trace(path)


def test_unparsable_cell_is_hard_error(tmp_path):
    rows = synthetic_rows(3)
    rows[1]["pf_mean"] = "not-a-number"
    path = write_trace(tmp_path / "bad.csv", rows)
    with pytest.raises(SchemaError, match="row 1"):
        load_trace(path)


def test_empty_file_is_hard_error(tmp_path):
    path = tmp_path / "void.csv"
    path.write_text("")
    with pytest.raises(SchemaError):
        load_trace(path)


def test_missing_file_raises_file_not_found():
    with pytest.raises(FileNotFoundError):
        load_trace("/nonexistent/trace.csv")


def test_load_summary_validates_shape(summary_path, tmp_path):
    summary = load_summary(summary_path)
    assert [entry["value"] for entry in summary["values"]] == [50, 1000]
    bad = tmp_path / "bad.json"
    bad.write_text('{"axis": "N_s", "values": [{"value": 1}]}')
    with pytest.raises(SchemaError, match="violation_count"):
        load_summary(bad)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def test_render_run_produces_figure(trace_path, tmp_path):
    out = render_run(load_trace(trace_path), tmp_path / "fig.png")
    assert out.exists() and out.stat().st_size > 5000


def test_render_run_empty_trace_warns_but_succeeds(tmp_path):
    path = write_trace(tmp_path / "empty.csv", [])
    with pytest.warns(UserWarning, match="no rows"):
        out = render_run(load_trace(path), tmp_path / "empty.png")
    assert out.exists()


def test_rendering_is_deterministic(trace_path, tmp_path):
    trace = load_trace(trace_path)
    a = render_run(trace, tmp_path / "a.png")
    b = render_run(trace, tmp_path / "b.png")
    assert a.read_bytes() == b.read_bytes()


def test_rendering_leaves_input_untouched(trace_path, tmp_path):
    before = trace_path.read_bytes()
    render_run(load_trace(trace_path), tmp_path / "fig.png")
    assert trace_path.read_bytes() == before


def test_render_sweep_produces_figure(summary_path, tmp_path):
    out = render_sweep(load_summary(summary_path), tmp_path / "sweep.png")
    assert out.exists() and out.stat().st_size > 5000


def test_render_sweep_single_value(tmp_path, summary_path):
    import json

    summary = load_summary(summary_path)
    summary["values"] = summary["values"][:1]
    path = tmp_path / "single.json"
    path.write_text(json.dumps(summary))
    out = render_sweep(load_summary(path), tmp_path / "single.png")
    assert out.exists()


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------


def test_cli_render_run(trace_path, tmp_path, capsys):
    assert main_run(["--trace", str(trace_path), "--out", str(tmp_path / "f.png")]) == 0
    assert "wrote" in capsys.readouterr().out


def test_cli_render_run_missing_column(tmp_path, capsys):
    columns = tuple(c for c in TRACE_COLUMNS if c != "pf_q975")
    rows = [{k: v for k, v in r.items() if k != "pf_q975"} for r in synthetic_rows(3)]
    path = write_trace(tmp_path / "partial.csv", rows, columns)
    assert main_run(["--trace", str(path), "--out", str(tmp_path / "f.png")]) == 2
    assert "pf_q975" in capsys.readouterr().err


def test_cli_render_run_missing_file(tmp_path, capsys):
    code = main_run(["--trace", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "f.png")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_cli_render_sweep(summary_path, tmp_path, capsys):
    assert main_sweep(["--summary", str(summary_path), "--out", str(tmp_path / "s.png")]) == 0
    assert "wrote" in capsys.readouterr().out

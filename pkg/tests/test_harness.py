import dataclasses
import json

import numpy as np
import pytest

from pmpc import (
    ConfigError,
    PointMass,
    RunConfig,
    SimulationTrace,
    TRACE_COLUMNS,
    Uniform,
    build_model,
    linear_gaussian,
    pf_check,
    run_closed_loop,
    run_sweep,
)
from pmpc.harness import draw_true_randomness, make_problem

from conftest import deterministic_linear_model

TINY = dict(particles=60, scenarios=24, horizon=2, steps=4, seed=1)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def test_config_from_full_dict():
    cfg = RunConfig.from_dict(
        {
            "model": {"name": "paper_example", "params": {}},
            "horizon": 3,
            "particles": 5000,
            "scenarios": 1000,
            "epsilon": 0.1,
            "control_grid": {"lo": -5, "hi": 5, "spacing": 1},
            "steps": 30,
            "seed": 7,
        }
    )
    assert cfg.model_name == "paper_example"
    assert cfg.horizon == 3 and cfg.particles == 5000 and cfg.scenarios == 1000
    assert cfg.control_grid == tuple(float(u) for u in range(-5, 6))
    assert len(cfg.control_grid) == 11
    assert cfg.seed == 7


def test_config_model_shorthand_and_defaults():
    cfg = RunConfig.from_dict({"model": "linear_gaussian"})
    assert cfg.model_name == "linear_gaussian"
    assert cfg.steps == 30 and cfg.epsilon == 0.1


@pytest.mark.parametrize(
    "raw",
    [
        {"unknown_key": 1},
        {"model": 42},
        {"model": {"name": "benchmark", "extra": 1}},
        {"control_grid": {"lo": -5, "hi": 5}},
        {"control_grid": {"lo": -5, "hi": 5, "spacing": 0.3}},
        {"control_grid": {"lo": -5, "hi": 5, "spacing": -1}},
        {"epsilon": 1.0},
        {"epsilon": [0.1, 0.2]},
        {"horizon": 0},
        {"particles": 0},
        {"scenarios": -3},
        {"steps": -1},
        {"seed": -1},
    ],
)
def test_config_validation_rejects(raw):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(raw)


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig(**TINY)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert RunConfig.from_file(path) == cfg


def test_missing_config_file():
    with pytest.raises(ConfigError):
        RunConfig.from_file("/nonexistent/cfg.json")


def test_model_registry():
    assert build_model("benchmark").name == "benchmark"
    assert build_model("paper_example").name == "benchmark"  # schema alias
    assert build_model("linear_gaussian", {"a": 0.5}).name == "linear_gaussian"
    with pytest.raises(ConfigError):
        build_model("unknown_model")
    with pytest.raises(ConfigError):
        build_model("linear_gaussian", {"bogus": 1})


def test_benchmark_density_overrides_via_config():
    model = build_model("benchmark", {"w": {"type": "point_mass", "value": 0.0}})
    assert model.w_law == PointMass(0.0)


# ---------------------------------------------------------------------------
# Closed loop
# ---------------------------------------------------------------------------


def test_run_produces_full_trace_and_metrics():
    cfg = RunConfig(**TINY)
    trace, metrics = run_closed_loop(cfg)
    assert len(trace) == cfg.steps
    grid = set(cfg.control_grid)
    assert all(u in grid for u in trace.u)
    assert np.all(np.isfinite(trace.pf_mean))
    assert np.all(trace.pf_q025 <= trace.pf_mean) and np.all(trace.pf_mean <= trace.pf_q975)
    assert metrics.steps == cfg.steps and metrics.seed == cfg.seed
    assert metrics.violation_count == int(np.count_nonzero(~trace.constraint_ok))
    assert metrics.mean_step_seconds > 0.0


def test_zero_steps_edge():
    trace, metrics = run_closed_loop(RunConfig(**{**TINY, "steps": 0}))
    assert len(trace) == 0
    assert metrics.violation_count == 0
    assert metrics.total_realized_cost == 0.0
    assert metrics.mean_ess == 0.0


def test_metrics_recomputable_from_trace():
    cfg = RunConfig(**{**TINY, "steps": 6})
    trace, metrics = run_closed_loop(cfg)
    assert metrics.violation_count == int(np.sum(trace.x_true < 1.0))
    # stage costs in the trace match the problem cost applied to the columns
    prob = make_problem(cfg)
    np.testing.assert_array_equal(trace.stage_cost, prob.stage_cost(trace.x_true, trace.u))


def test_deterministic_model_pf_mean_tracks_truth():
    # Zero noise and identity measurement: every particle collapses onto the
    # true state, so the quantiles match it exactly and the mean up to the
    # rounding of weighted averaging.
    model = deterministic_linear_model(a=1.2, b=1.0)
    cfg = RunConfig(**{**TINY, "steps": 5})
    trace, _ = run_closed_loop(cfg, model=model)
    np.testing.assert_allclose(trace.pf_mean, trace.x_true, rtol=1e-13)
    np.testing.assert_allclose(trace.pf_q025, trace.x_true, rtol=1e-13)
    np.testing.assert_allclose(trace.pf_q975, trace.x_true, rtol=1e-13)


def test_seed_reproducibility_byte_identical(tmp_path):
    cfg = RunConfig(**TINY)
    paths = []
    for name in ("a", "b"):
        trace, _ = run_closed_loop(cfg)
        path = tmp_path / f"{name}.csv"
        trace.write_csv(path)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_true_noise_pinned_across_controller_parameters():
    base = RunConfig(**TINY)
    variants = [
        base,
        dataclasses.replace(base, scenarios=97),
        dataclasses.replace(base, particles=31),
        dataclasses.replace(base, horizon=3),
    ]
    model = build_model("benchmark")
    draws = [draw_true_randomness(cfg, model) for cfg in variants]
    x0, ws, vs = draws[0]
    for x0_v, ws_v, vs_v in draws[1:]:
        assert x0_v == x0
        assert np.array_equal(ws_v, ws)
        assert np.array_equal(vs_v, vs)


def test_first_measurement_invariant_to_controller_parameters():
    base = RunConfig(**TINY)
    more_scenarios = dataclasses.replace(base, scenarios=96)
    t1, _ = run_closed_loop(base)
    t2, _ = run_closed_loop(more_scenarios)
    assert t1.x_true[0] == t2.x_true[0]
    assert t1.y[0] == t2.y[0]


def test_vector_models_rejected_by_trace_schema():
    from pmpc import Product, StochasticModel, additive_measurement

    v_law = Product((PointMass(0.0), PointMass(0.0)))
    model = StochasticModel(
        n=2,
        m=1,
        f=lambda x, u, w: x + w,
        h=lambda x, v: x + v,
        w_law=Product((PointMass(0.0), PointMass(0.0))),
        v_law=v_law,
        x0_law=Product((Uniform(0, 1), Uniform(0, 1))),
        meas_likelihood=lambda y, x: np.prod(v_law.pdf(y - x), axis=-1),
    )
    with pytest.raises(ConfigError):
        run_closed_loop(RunConfig(**TINY), model=model)


# ---------------------------------------------------------------------------
# Trace files
# ---------------------------------------------------------------------------


def test_trace_csv_round_trip(tmp_path):
    trace, _ = run_closed_loop(RunConfig(**TINY))
    path = tmp_path / "trace.csv"
    trace.write_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(TRACE_COLUMNS)
    back = SimulationTrace.read_csv(path)
    for name in TRACE_COLUMNS:
        np.testing.assert_array_equal(back.column(name), trace.column(name), err_msg=name)


def test_trace_schema_enforced_on_read(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x_true\n0,1.0\n")
    with pytest.raises(ConfigError):
        SimulationTrace.read_csv(path)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def test_sweep_aggregates_and_files(tmp_path):
    base = RunConfig(**TINY)
    summary = run_sweep(base, "N_s", [12, 24], repeats=2, out_dir=tmp_path)
    assert summary["axis"] == "scenarios"
    assert [entry["value"] for entry in summary["values"]] == [12, 24]
    for entry in summary["values"]:
        runs = entry["runs"]
        assert len(runs) == 2
        assert {m["seed"] for m in runs} == {base.seed, base.seed + 1}
        violations = [m["violation_count"] for m in runs]
        assert entry["violation_count"]["min"] == min(violations)
        assert entry["violation_count"]["max"] == max(violations)
        assert entry["violation_count"]["mean"] == pytest.approx(np.mean(violations))
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "runs" / "scenarios=12" / "rep0" / "trace.csv").exists()
    assert (tmp_path / "runs" / "scenarios=24" / "rep1" / "metrics.json").exists()


def test_sweep_empty_values():
    summary = run_sweep(RunConfig(**TINY), "N_s", [])
    assert summary["values"] == []


def test_sweep_rejects_unknown_axis():
    with pytest.raises(ConfigError):
        run_sweep(RunConfig(**TINY), "gamma", [1])


def _strip_timing(summary):
    for entry in summary["values"]:
        for run in entry["runs"]:
            run.pop("mean_step_seconds")
    return summary


def test_sweep_worker_count_does_not_change_results(tmp_path):
    base = RunConfig(**TINY)
    s1 = run_sweep(base, "N_p", [40, 60], repeats=2, workers=1, out_dir=tmp_path / "w1")
    s2 = run_sweep(base, "N_p", [40, 60], repeats=2, workers=4, out_dir=tmp_path / "w4")
    assert _strip_timing(s1)["values"] == _strip_timing(s2)["values"]
    for rel in ("runs/particles=40/rep0/trace.csv", "runs/particles=60/rep1/trace.csv"):
        assert (tmp_path / "w1" / rel).read_bytes() == (tmp_path / "w4" / rel).read_bytes()


def test_sweep_seed_axis():
    summary = run_sweep(RunConfig(**TINY), "seed", [3, 9])
    seeds = [entry["runs"][0]["seed"] for entry in summary["values"]]
    assert seeds == [3, 9]


# ---------------------------------------------------------------------------
# pf-check
# ---------------------------------------------------------------------------


def test_pf_check_passes_and_writes_report(tmp_path):
    report = pf_check(tmp_path, seed=0, n_particles=2000, steps=30)
    assert report["passed"]
    assert report["mean_abs_error"] <= report["mean_abs_error_tolerance"]
    written = json.loads((tmp_path / "pf_check.json").read_text())
    assert written["passed"] is True

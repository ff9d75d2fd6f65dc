"""Closed-loop simulation driver: configuration, traces, metrics, sweeps.

The harness wires the true system, the particle filter and the scenario
optimizer together around one fixed benchmark problem: quadratic cost
``100 x^2 + u^2`` with terminal ``100 x^2``, a state floor ``x >= 1``
enforced as a chance constraint, and an evenly spaced control grid.
True-system randomness lives on its own seed streams, so controller
parameters (particles, scenarios, horizon) can change without perturbing
the realized noise - runs with the same seed face the same disturbance
sequence.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .controller import init_controller, pmpc_step
from .densities import RngStream, Stream, density_from_config
from .errors import ConfigError
from .filtering import init_particles, measurement_update, resample, time_update
from .kalman import kalman_filter
from .models import StochasticModel, benchmark_model, linear_gaussian, measure, step
from .scenario import ScenarioProblem

__all__ = [
    "RunConfig",
    "SimulationTrace",
    "RunMetrics",
    "TRACE_COLUMNS",
    "STATE_FLOOR",
    "build_model",
    "make_problem",
    "draw_true_randomness",
    "run_closed_loop",
    "run_sweep",
    "pf_check",
]

#: State constraint level of the built-in benchmark problem.
STATE_FLOOR = 1.0

#: Exact column order of trace.csv files.
TRACE_COLUMNS = (
    "t",
    "x_true",
    "y",
    "u",
    "pf_mean",
    "pf_q025",
    "pf_q975",
    "ess",
    "stage_cost",
    "constraint_ok",
    "fallback_used",
    "degenerate_flag",
)

_CONFIG_KEYS = {
    "model",
    "horizon",
    "particles",
    "scenarios",
    "epsilon",
    "control_grid",
    "steps",
    "seed",
}
_GRID_KEYS = {"lo", "hi", "spacing"}


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one closed-loop run."""

    model_name: str = "benchmark"
    model_params: Mapping = field(default_factory=dict)
    horizon: int = 3
    particles: int = 5000
    scenarios: int = 1000
    epsilon: float | tuple[float, ...] = 0.1
    control_lo: float = -5.0
    control_hi: float = 5.0
    control_spacing: float = 1.0
    steps: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("horizon", "particles", "scenarios"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise ConfigError(f"steps must be a nonnegative integer, got {self.steps!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.control_spacing <= 0.0:
            raise ConfigError(f"grid spacing must be > 0, got {self.control_spacing}")
        span = self.control_hi - self.control_lo
        if span < 0:
            raise ConfigError("control grid requires lo <= hi")
        ratio = span / self.control_spacing
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(
                f"(hi - lo) = {span} is not an integer multiple of spacing {self.control_spacing}"
            )
        eps = self.epsilon
        if isinstance(eps, (int, float, np.integer, np.floating)):
            eps_tuple: tuple[float, ...] = (float(eps),)
        else:
            eps_tuple = tuple(float(e) for e in eps)
            if len(eps_tuple) != self.horizon:
                raise ConfigError(
                    f"per-step epsilon needs {self.horizon} entries, got {len(eps_tuple)}"
                )
        if any(not (0.0 <= e < 1.0) for e in eps_tuple):
            raise ConfigError(f"epsilon must lie in [0, 1), got {eps}")

    @property
    def control_grid(self) -> tuple[float, ...]:
        count = round((self.control_hi - self.control_lo) / self.control_spacing)
        return tuple(float(self.control_lo + i * self.control_spacing) for i in range(count + 1))

    @classmethod
    def from_dict(cls, raw: Mapping) -> "RunConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict = {}
        model = raw.get("model", "benchmark")
        if isinstance(model, str):
            kwargs["model_name"] = model
        elif isinstance(model, Mapping):
            extra = set(model) - {"name", "params"}
            if extra:
                raise ConfigError(f"unknown model keys: {sorted(extra)}")
            kwargs["model_name"] = model.get("name", "benchmark")
            kwargs["model_params"] = dict(model.get("params", {}))
        else:
            raise ConfigError("model must be a name or an object with name/params")
        if "control_grid" in raw:
            grid = raw["control_grid"]
            if not isinstance(grid, Mapping) or set(grid) != _GRID_KEYS:
                raise ConfigError(f"control_grid must be an object with keys {sorted(_GRID_KEYS)}")
            kwargs["control_lo"] = float(grid["lo"])
            kwargs["control_hi"] = float(grid["hi"])
            kwargs["control_spacing"] = float(grid["spacing"])
        for src, dst in (
            ("horizon", "horizon"),
            ("particles", "particles"),
            ("scenarios", "scenarios"),
            ("steps", "steps"),
            ("seed", "seed"),
        ):
            if src in raw:
                kwargs[dst] = raw[src]
        if "epsilon" in raw:
            eps = raw["epsilon"]
            kwargs["epsilon"] = float(eps) if isinstance(eps, (int, float)) else tuple(eps)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        eps = self.epsilon
        return {
            "model": {"name": self.model_name, "params": dict(self.model_params)},
            "horizon": self.horizon,
            "particles": self.particles,
            "scenarios": self.scenarios,
            "epsilon": eps if isinstance(eps, (int, float)) else list(eps),
            "control_grid": {
                "lo": self.control_lo,
                "hi": self.control_hi,
                "spacing": self.control_spacing,
            },
            "steps": self.steps,
            "seed": self.seed,
        }


_MODEL_BUILDERS: dict[str, Callable] = {}


def _register(name: str, builder: Callable) -> None:
    _MODEL_BUILDERS[name] = builder


def _build_benchmark(params: Mapping) -> StochasticModel:
    unknown = set(params) - {"w", "v", "x0"}
    if unknown:
        raise ConfigError(f"unknown benchmark model params: {sorted(unknown)}")
    laws = {k: density_from_config(v) for k, v in params.items()}
    return benchmark_model(**laws)


def _build_linear_gaussian(params: Mapping) -> StochasticModel:
    allowed = {"a", "b", "q", "r", "x0_mean", "x0_var"}
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown linear_gaussian params: {sorted(unknown)}")
    return linear_gaussian(**{k: float(v) for k, v in params.items()})


_register("benchmark", _build_benchmark)
_register("paper_example", _build_benchmark)  # config-schema alias
_register("linear_gaussian", _build_linear_gaussian)


def build_model(name: str, params: Mapping | None = None) -> StochasticModel:
    """Resolve a built-in model name from a run configuration."""
    try:
        builder = _MODEL_BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown model {name!r}; available: {sorted(_MODEL_BUILDERS)}"
        ) from None
    return builder(params or {})


def _stage_cost(x, u):
    return 100.0 * x * x + u * u


def _terminal_cost(x):
    return 100.0 * x * x


def _floor_constraint(x):
    return x >= STATE_FLOOR


def make_problem(cfg: RunConfig) -> ScenarioProblem:
    """The benchmark horizon problem for a configuration (scalar models only)."""
    return ScenarioProblem(
        horizon=cfg.horizon,
        stage_cost=_stage_cost,
        terminal_cost=_terminal_cost,
        control_grid=cfg.control_grid,
        constraint=_floor_constraint,
        epsilon=cfg.epsilon,
        n_scenarios=cfg.scenarios,
    )


@dataclass
class SimulationTrace:
    """Column-oriented record of one closed-loop run, one row per step."""

    t: np.ndarray
    x_true: np.ndarray
    y: np.ndarray
    u: np.ndarray
    pf_mean: np.ndarray
    pf_q025: np.ndarray
    pf_q975: np.ndarray
    ess: np.ndarray
    stage_cost: np.ndarray
    constraint_ok: np.ndarray
    fallback_used: np.ndarray
    degenerate_flag: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def write_csv(self, path) -> None:
        """Write the trace with full-precision floats and 0/1 booleans."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for i in range(len(self)):
                row = []
                for name in TRACE_COLUMNS:
                    value = self.column(name)[i]
                    if name == "t":
                        row.append(str(int(value)))
                    elif name in ("constraint_ok", "fallback_used", "degenerate_flag"):
                        row.append(str(int(value)))
                    else:
                        row.append(repr(float(value)))
                writer.writerow(row)

    @classmethod
    def read_csv(cls, path) -> "SimulationTrace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ConfigError(f"trace file {path} is empty") from None
            if tuple(header) != TRACE_COLUMNS:
                raise ConfigError(
                    f"trace file {path} has columns {header}, expected {list(TRACE_COLUMNS)}"
                )
            rows = list(reader)
        cols: dict[str, np.ndarray] = {}
        for j, name in enumerate(TRACE_COLUMNS):
            raw = [row[j] for row in rows]
            if name == "t":
                cols[name] = np.asarray(raw, dtype=int)
            elif name in ("constraint_ok", "fallback_used", "degenerate_flag"):
                cols[name] = np.asarray(raw, dtype=int).astype(bool)
            else:
                cols[name] = np.asarray(raw, dtype=float)
        return cls(**cols)


@dataclass
class RunMetrics:
    """Aggregates of one run; recomputable from its trace (except timing)."""

    violation_count: int
    total_realized_cost: float
    mean_ess: float
    fallback_count: int
    mean_step_seconds: float
    steps: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "violation_count": self.violation_count,
            "total_realized_cost": self.total_realized_cost,
            "mean_ess": self.mean_ess,
            "fallback_count": self.fallback_count,
            "mean_step_seconds": self.mean_step_seconds,
            "steps": self.steps,
            "seed": self.seed,
        }


def draw_true_randomness(cfg: RunConfig, model: StochasticModel):
    """Pre-draw the true system's randomness: ``(x0, w[0:T], v[0:T])``.

    Drawn from the dedicated true-system streams in index order, so the
    result depends only on (seed, model, steps) - never on controller
    parameters.
    """
    x0 = model.x0_law.sample(RngStream(cfg.seed, Stream.TRUE_INIT))
    w_size = cfg.steps if model.w_law.dim == 1 else (cfg.steps,)
    v_size = cfg.steps if model.v_law.dim == 1 else (cfg.steps,)
    ws = np.asarray(model.w_law.sample(RngStream(cfg.seed, Stream.TRUE_PROCESS), w_size))
    vs = np.asarray(model.v_law.sample(RngStream(cfg.seed, Stream.TRUE_MEASUREMENT), v_size))
    return x0, ws, vs


def run_closed_loop(cfg: RunConfig, model: StochasticModel | None = None):
    """Simulate ``cfg.steps`` measure-act-propagate steps of the closed loop.

    Returns ``(trace, metrics)``.  A ``model`` instance may be injected in
    place of the configured built-in (library extension point); it must be
    scalar (``n == 1``) to fit the trace schema.
    """
    model = build_model(cfg.model_name, cfg.model_params) if model is None else model
    if model.n != 1:
        raise ConfigError("the closed-loop trace schema requires a scalar model (n == 1)")
    prob = make_problem(cfg)
    x0, ws, vs = draw_true_randomness(cfg, model)

    cs = init_controller(model, cfg.particles, RngStream(cfg.seed, Stream.FILTER_INIT))
    resample_rng = RngStream(cfg.seed, Stream.RESAMPLING)
    process_rng = RngStream(cfg.seed, Stream.FILTER_PROCESS)
    scenario_rng = RngStream(cfg.seed, Stream.SCENARIO)

    rows: list[tuple] = []
    total_cost = 0.0
    step_seconds = []
    x = float(x0)
    for t in range(cfg.steps):
        y = float(measure(model, x, vs[t]))
        t0 = time.perf_counter()
        u, cs, diag = pmpc_step(
            cs,
            y,
            model,
            prob,
            resample_rng=resample_rng,
            process_rng=process_rng,
            scenario_rng=scenario_rng,
        )
        step_seconds.append(time.perf_counter() - t0)
        fs = diag.filter_stats
        stage = float(_stage_cost(x, u))
        ok = bool(_floor_constraint(x))
        rows.append(
            (
                t,
                x,
                y,
                float(u),
                fs.mean,
                fs.quantile_lo,
                fs.quantile_hi,
                fs.effective_sample_size,
                stage,
                ok,
                diag.solution.fallback_used,
                fs.degenerate,
            )
        )
        total_cost += stage
        x = float(step(model, x, u, ws[t]))
    if cfg.steps > 0:
        total_cost += float(_terminal_cost(x))

    columns = list(zip(*rows)) if rows else [[] for _ in TRACE_COLUMNS]
    trace = SimulationTrace(
        t=np.asarray(columns[0], dtype=int),
        x_true=np.asarray(columns[1], dtype=float),
        y=np.asarray(columns[2], dtype=float),
        u=np.asarray(columns[3], dtype=float),
        pf_mean=np.asarray(columns[4], dtype=float),
        pf_q025=np.asarray(columns[5], dtype=float),
        pf_q975=np.asarray(columns[6], dtype=float),
        ess=np.asarray(columns[7], dtype=float),
        stage_cost=np.asarray(columns[8], dtype=float),
        constraint_ok=np.asarray(columns[9], dtype=bool),
        fallback_used=np.asarray(columns[10], dtype=bool),
        degenerate_flag=np.asarray(columns[11], dtype=bool),
    )
    metrics = RunMetrics(
        violation_count=int(np.count_nonzero(~trace.constraint_ok)),
        total_realized_cost=total_cost,
        mean_ess=float(np.mean(trace.ess)) if len(trace) else 0.0,
        fallback_count=int(np.count_nonzero(trace.fallback_used)),
        mean_step_seconds=float(np.mean(step_seconds)) if step_seconds else 0.0,
        steps=cfg.steps,
        seed=cfg.seed,
    )
    return trace, metrics


_AXIS_FIELDS = {
    "N": "horizon",
    "horizon": "horizon",
    "N_p": "particles",
    "particles": "particles",
    "N_s": "scenarios",
    "scenarios": "scenarios",
    "epsilon": "epsilon",
    "eps": "epsilon",
    "seed": "seed",
}


def _sweep_config(base: RunConfig, axis_field: str, value, rep: int) -> RunConfig:
    if axis_field == "seed":
        return replace(base, seed=int(value) + rep)
    return replace(base, **{axis_field: value}, seed=base.seed + rep)


def run_sweep(
    base: RunConfig,
    axis: str,
    values,
    repeats: int = 1,
    workers: int = 1,
    out_dir=None,
    model: StochasticModel | None = None,
) -> dict:
    """Run ``repeats`` seeds of every value along one parameter axis.

    Repeat r of every value reuses seed ``base.seed + r`` (for the seed
    axis, ``value + r``), so the true-system noise realization is shared
    across values and differences are attributable to the controller.
    Runs are independent and may execute on ``workers`` threads; results
    are identical for any worker count.  Returns the summary dict; with
    ``out_dir`` also writes ``summary.json`` plus per-run traces.
    """
    if axis not in _AXIS_FIELDS:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {sorted(_AXIS_FIELDS)}")
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    axis_field = _AXIS_FIELDS[axis]
    jobs = [
        (value, rep, _sweep_config(base, axis_field, value, rep))
        for value in values
        for rep in range(repeats)
    ]
    if workers > 1 and jobs:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda job: run_closed_loop(job[2], model), jobs))
    else:
        outcomes = [run_closed_loop(cfg, model) for _, _, cfg in jobs]

    summary: dict = {"axis": axis_field, "repeats": repeats, "base": base.to_dict(), "values": []}
    per_value: dict = {}
    for (value, rep, cfg), (trace, metrics) in zip(jobs, outcomes):
        per_value.setdefault(value, []).append(metrics)
        if out_dir is not None:
            run_dir = Path(out_dir) / "runs" / f"{axis_field}={value}" / f"rep{rep}"
            trace.write_csv(run_dir / "trace.csv")
            with open(run_dir / "metrics.json", "w") as fh:
                json.dump(metrics.to_dict(), fh, indent=2, sort_keys=True)
    for value in values:
        runs = per_value[value]
        violations = [m.violation_count for m in runs]
        costs = [m.total_realized_cost for m in runs]
        summary["values"].append(
            {
                "value": value,
                "violation_count": {
                    "mean": float(np.mean(violations)),
                    "min": int(np.min(violations)),
                    "max": int(np.max(violations)),
                },
                "total_realized_cost": {
                    "mean": float(np.mean(costs)),
                    "min": float(np.min(costs)),
                    "max": float(np.max(costs)),
                },
                "runs": [m.to_dict() for m in runs],
            }
        )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


def pf_check(
    out_dir=None,
    seed: int = 0,
    n_particles: int = 10_000,
    steps: int = 50,
    mean_tol: float = 0.1,
    var_rel_tol: float = 0.10,
) -> dict:
    """Score the particle filter against the exact recursion on a linear-Gaussian model.

    Simulates a fixed input/measurement record on
    ``linear_gaussian(0.9, 1, 1, 1, 0, 1)``, runs the particle filter and
    the closed-form filter side by side, and reports the time-averaged
    absolute error of the posterior mean and the time-averaged relative
    error of the posterior variance.
    """
    started = time.perf_counter()
    a, b, q, r, x0_mean, x0_var = 0.9, 1.0, 1.0, 1.0, 0.0, 1.0
    model = linear_gaussian(a, b, q, r, x0_mean, x0_var)
    controls = np.sin(0.3 * np.arange(steps))

    cfg_like = RunConfig(model_name="linear_gaussian", steps=steps, seed=seed)
    x0, ws, vs = draw_true_randomness(cfg_like, model)
    xs, ys = [], []
    x = float(x0)
    for t in range(steps):
        xs.append(x)
        ys.append(float(measure(model, x, vs[t])))
        x = float(step(model, x, controls[t], ws[t]))

    prior = init_particles(model, n_particles, RngStream(seed, Stream.FILTER_INIT))
    resample_rng = RngStream(seed, Stream.RESAMPLING)
    process_rng = RngStream(seed, Stream.FILTER_PROCESS)
    pf_means, pf_vars = [], []
    for t in range(steps):
        weighted = measurement_update(prior, model, ys[t])
        mean = float(np.average(weighted.particles, weights=weighted.weights))
        var = float(np.average((weighted.particles - mean) ** 2, weights=weighted.weights))
        pf_means.append(mean)
        pf_vars.append(var)
        posterior = resample(weighted, resample_rng)
        prior = time_update(posterior, model, controls[t], process_rng)

    kf_means, kf_vars = kalman_filter(a, b, q, r, x0_mean, x0_var, controls, ys)
    mean_abs_error = float(np.mean(np.abs(np.asarray(pf_means) - kf_means)))
    var_rel_error = float(np.mean(np.abs(np.asarray(pf_vars) - kf_vars) / kf_vars))
    report = {
        "model": "linear_gaussian(0.9, 1, 1, 1, 0, 1)",
        "n_particles": n_particles,
        "steps": steps,
        "seed": seed,
        "mean_abs_error": mean_abs_error,
        "mean_abs_error_tolerance": mean_tol,
        "var_rel_error": var_rel_error,
        "var_rel_error_tolerance": var_rel_tol,
        "runtime_seconds": time.perf_counter() - started,
        "passed": bool(mean_abs_error <= mean_tol and var_rel_error <= var_rel_tol),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "pf_check.json", "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    return report

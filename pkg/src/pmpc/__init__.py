"""Particle-filter state estimation fused with scenario-based receding-horizon control.

The package closes the loop on stochastic nonlinear systems observed
through noisy outputs: a particle filter tracks the conditional state
density, each measurement's posterior particles seed a scenario ensemble,
and an exhaustive grid optimizer picks the control sequence minimizing the
scenario-summed cost subject to empirical chance constraints.  Only the
first control is applied before the next measurement triggers a re-solve.
"""

from .controller import ControllerState, StepDiagnostics, init_controller, pmpc_step
from .densities import (
    Density,
    Gaussian,
    PointMass,
    Product,
    RngStream,
    Stream,
    Uniform,
    density_from_config,
)
from .errors import ConfigError, DegenerateWeights, NumericalError, PmpcError
from .filtering import (
    FilterStats,
    ParticleSet,
    init_particles,
    measurement_update,
    resample,
    time_update,
)
from .harness import (
    RunConfig,
    RunMetrics,
    SimulationTrace,
    TRACE_COLUMNS,
    build_model,
    make_problem,
    pf_check,
    run_closed_loop,
    run_sweep,
)
from .kalman import kalman_filter
from .models import (
    StochasticModel,
    additive_measurement,
    benchmark_model,
    linear_gaussian,
    measure,
    step,
)
from .scenario import (
    ScenarioEnsemble,
    ScenarioProblem,
    ScenarioSolution,
    build_ensemble,
    chance_threshold,
    evaluate_sequence,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ControllerState",
    "DegenerateWeights",
    "Density",
    "FilterStats",
    "Gaussian",
    "NumericalError",
    "ParticleSet",
    "PmpcError",
    "PointMass",
    "Product",
    "RngStream",
    "RunConfig",
    "RunMetrics",
    "ScenarioEnsemble",
    "ScenarioProblem",
    "ScenarioSolution",
    "SimulationTrace",
    "StepDiagnostics",
    "StochasticModel",
    "Stream",
    "TRACE_COLUMNS",
    "Uniform",
    "additive_measurement",
    "benchmark_model",
    "build_ensemble",
    "build_model",
    "chance_threshold",
    "density_from_config",
    "evaluate_sequence",
    "init_controller",
    "init_particles",
    "kalman_filter",
    "linear_gaussian",
    "make_problem",
    "measure",
    "measurement_update",
    "pf_check",
    "pmpc_step",
    "resample",
    "run_closed_loop",
    "run_sweep",
    "solve",
    "step",
    "time_update",
]

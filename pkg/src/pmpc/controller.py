"""Receding-horizon step combining the particle filter and the scenario solver.

One step runs, in order: condition the prior particles on the new
measurement, resample into an evenly weighted posterior, build a scenario
ensemble from that posterior, solve the sampled horizon problem, apply the
first control of the optimal sequence, and propagate the particles with it.
The rest of the sequence is discarded; the next measurement triggers a
fresh solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densities import RngStream
from .errors import DegenerateWeights
from .filtering import (
    POSTERIOR,
    PRIOR,
    FilterStats,
    ParticleSet,
    init_particles,
    measurement_update,
    resample,
    stats,
    time_update,
)
from .models import StochasticModel
from .scenario import ScenarioProblem, ScenarioSolution, build_ensemble, solve

__all__ = ["ControllerState", "StepDiagnostics", "init_controller", "pmpc_step"]


@dataclass
class ControllerState:
    """Carry-over between steps: the propagated prior and the step index."""

    prior: ParticleSet
    last_solution: ScenarioSolution | None
    t: int


@dataclass
class StepDiagnostics:
    """Per-step observability: posterior summary and the full solver output."""

    filter_stats: FilterStats
    solution: ScenarioSolution


def init_controller(model: StochasticModel, n_p: int, rng: RngStream) -> ControllerState:
    """Start a controller with ``n_p`` particles drawn from the initial-state law."""
    return ControllerState(prior=init_particles(model, n_p, rng), last_solution=None, t=0)


def pmpc_step(
    cs: ControllerState,
    y,
    model: StochasticModel,
    prob: ScenarioProblem,
    *,
    resample_rng: RngStream,
    process_rng: RngStream,
    scenario_rng: RngStream,
):
    """Advance the closed loop by one measurement.

    Returns ``(u, new_state, diagnostics)`` where ``u`` is the first element
    of the optimal sequence (always a member of the control grid).

    A degenerate measurement (all particle likelihoods underflow, e.g. an
    extreme outlier) does not abort the loop: the update falls back to the
    prior particles with uniform weights, the posterior summary is flagged,
    and optimization proceeds from that coasted set.
    """
    n_p = cs.prior.count
    try:
        weighted = measurement_update(cs.prior, model, y)
        degenerate = False
    except DegenerateWeights:
        weighted = ParticleSet(cs.prior.particles, np.full(n_p, 1.0 / n_p), PRIOR)
        degenerate = True
    filter_stats = stats(weighted, degenerate=degenerate)
    if degenerate:
        posterior = ParticleSet(cs.prior.particles, np.full(n_p, 1.0 / n_p), POSTERIOR)
    else:
        posterior = resample(weighted, resample_rng)

    ensemble = build_ensemble(posterior, prob, model, scenario_rng)
    solution = solve(ensemble, prob, model)
    u = solution.sequence[0]

    new_prior = time_update(posterior, model, u, process_rng)
    new_state = ControllerState(prior=new_prior, last_solution=solution, t=cs.t + 1)
    return u, new_state, StepDiagnostics(filter_stats=filter_stats, solution=solution)

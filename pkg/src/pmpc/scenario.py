"""Sampled finite-horizon control optimization over a finite control grid.

The optimizer enumerates every control sequence on the grid, rolls all
scenarios forward under frozen noise (common random numbers), discards
sequences that fail the empirical chance constraints and returns the
cheapest survivor.  Enumeration shares rollout prefixes: the state after a
given control prefix does not depend on the rest of the sequence, so each
(prefix, scenario) state is computed once.  That reduces the work from
``O(|U|^N * N * N_s)`` model calls to ``O(sum_k |U|^k * N_s)`` while
producing bit-identical costs to evaluating each sequence on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .densities import RngStream
from .errors import ConfigError, NumericalError
from .filtering import POSTERIOR, ParticleSet
from .models import StochasticModel

__all__ = [
    "ScenarioProblem",
    "ScenarioEnsemble",
    "ScenarioSolution",
    "chance_threshold",
    "build_ensemble",
    "evaluate_sequence",
    "solve",
]

#: Cap on the largest array the enumerator may materialize (~1.6 GB of float64).
MAX_TABLE_CELLS = 200_000_000

#: Working-set target per evaluation tile, in scenario cells (~128 KB of
#: float64).  Prefix blocks are sized so each tile's temporaries stay
#: cache-resident, which keeps the cost per cell uniform across tree levels
#: and scenario counts.
TILE_CELLS = 16_384


def chance_threshold(epsilon: float, n_scenarios: int, tol: float = 1e-9) -> int:
    """Minimum satisfied-scenario count for an "at least (1 - eps) N_s" rule.

    Computed as ``ceil((1 - eps) * N_s)`` with a tiny slack so products
    that are integers up to binary rounding (0.9 * 50) are not pushed to
    the next integer.
    """
    return max(0, math.ceil((1.0 - epsilon) * n_scenarios - tol))


@dataclass(frozen=True, eq=False)
class ScenarioProblem:
    """Finite-horizon problem data: costs, grid, chance constraints, sizes.

    Attributes:
        horizon: Number of control moves N.
        stage_cost: ``c(x, u) -> cost`` per batch element, broadcast-vectorized;
            ``x`` keeps its component axis for vector states (consume it, e.g.
            ``np.sum(x * x, axis=-1)``) while ``u`` broadcasts over the batch
            axes with only its own component axis (if any) trailing.
        terminal_cost: ``c_N(x) -> cost`` on the final states.
        control_grid: Admissible control values, identical at every step;
            scalars for ``m == 1``, tuples/arrays for vector controls.
            Grid order defines the lexicographic tie-break.
        constraint: Predicate ``x -> bool`` (True = admissible state),
            applied to the state after each control move; either one
            callable used at every step or a sequence of N callables.
        epsilon: Violation level(s) in [0, 1); a scalar applies to every
            step, a sequence gives one level per step.
        n_scenarios: Number of sampled scenarios N_s.
    """

    horizon: int
    stage_cost: Callable
    terminal_cost: Callable
    control_grid: tuple
    constraint: Callable | Sequence[Callable]
    epsilon: float | tuple[float, ...]
    n_scenarios: int

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.n_scenarios < 1:
            raise ConfigError(f"scenario count must be >= 1, got {self.n_scenarios}")
        grid = tuple(self.control_grid)
        if not grid:
            raise ConfigError("control grid must be nonempty")
        object.__setattr__(self, "control_grid", grid)
        eps = self.epsilon
        if isinstance(eps, (int, float, np.integer, np.floating)):
            eps = (float(eps),) * self.horizon
        else:
            eps = tuple(float(e) for e in eps)
        if len(eps) != self.horizon:
            raise ConfigError(
                f"got {len(eps)} violation levels for horizon {self.horizon}"
            )
        if any(not (0.0 <= e < 1.0) for e in eps):
            raise ConfigError(f"violation levels must lie in [0, 1), got {eps}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def epsilons(self) -> tuple[float, ...]:
        return self.epsilon  # normalized to a per-step tuple at construction

    @property
    def constraints(self) -> tuple[Callable, ...]:
        if callable(self.constraint):
            return (self.constraint,) * self.horizon
        cs = tuple(self.constraint)
        if len(cs) != self.horizon:
            raise ConfigError(f"got {len(cs)} constraints for horizon {self.horizon}")
        return cs

    @property
    def thresholds(self) -> tuple[int, ...]:
        """Per-step satisfied-scenario counts required for feasibility."""
        return tuple(chance_threshold(e, self.n_scenarios) for e in self.epsilons)


@dataclass(frozen=True)
class ScenarioEnsemble:
    """Frozen randomness for one optimization: start states and noise.

    The noise table is drawn once and reused for every candidate sequence,
    which makes the minimization over sequences a deterministic problem.
    """

    initial_states: np.ndarray
    noise: np.ndarray

    @property
    def n_scenarios(self) -> int:
        return len(self.initial_states)


def build_ensemble(
    posterior: ParticleSet,
    prob: ScenarioProblem,
    model: StochasticModel,
    rng: RngStream,
) -> ScenarioEnsemble:
    """Sample scenario start states from the posterior particles, then noise.

    Start states are drawn uniformly with replacement (posterior particles
    are evenly weighted), followed by the ``N_s x N`` process-noise table;
    both come from ``rng`` in that fixed order.
    """
    if posterior.kind != POSTERIOR:
        raise ValueError("scenario ensemble must be built from a posterior-kind set")
    idx = rng.generator.integers(0, posterior.count, size=prob.n_scenarios)
    initial = posterior.particles[idx]
    size = (prob.n_scenarios, prob.horizon)
    noise = np.asarray(model.w_law.sample(rng, size), dtype=float)
    return ScenarioEnsemble(initial_states=initial, noise=noise)


@dataclass(frozen=True)
class ScenarioSolution:
    """Optimizer output for one horizon.

    ``per_step_satisfaction[k]`` counts scenarios whose state after control
    move k satisfied that step's constraint.  ``feasible`` is True iff every
    count met its threshold; ``fallback_used`` marks solutions chosen by the
    max-min-satisfaction rule because no sequence was feasible.
    """

    sequence: tuple
    cost: float
    per_step_satisfaction: tuple[int, ...]
    feasible: bool
    fallback_used: bool


def _first_bad(arr: np.ndarray):
    return tuple(int(i) for i in np.argwhere(~np.isfinite(np.asarray(arr)))[0])


def _check_ensemble(ens: ScenarioEnsemble, prob: ScenarioProblem) -> None:
    if ens.noise.shape[:2] != (prob.n_scenarios, prob.horizon):
        raise ConfigError(
            f"ensemble noise shape {ens.noise.shape} does not match "
            f"(N_s={prob.n_scenarios}, N={prob.horizon})"
        )


def evaluate_sequence(
    seq,
    ens: ScenarioEnsemble,
    prob: ScenarioProblem,
    model: StochasticModel,
):
    """Roll every scenario forward under one control sequence.

    Returns ``(cost, per_step_satisfaction)`` where cost is the sum over
    scenarios of stage costs plus terminal cost, and the counts tally
    scenarios satisfying each step's constraint.  Reusing the same ensemble
    makes repeated evaluations bit-identical.
    """
    seq = tuple(seq)
    if len(seq) != prob.horizon:
        raise ConfigError(f"sequence length {len(seq)} != horizon {prob.horizon}")
    _check_ensemble(ens, prob)
    constraints = prob.constraints
    x = ens.initial_states
    per_scenario = np.zeros(ens.n_scenarios)
    counts = []
    for k, u in enumerate(seq):
        per_scenario = per_scenario + np.asarray(prob.stage_cost(x, u), dtype=float)
        x = model.f(x, u, ens.noise[:, k, ...])
        if not np.all(np.isfinite(x)):
            s = _first_bad(x)[0]
            raise NumericalError(f"non-finite state at scenario {s}, step {k}")
        counts.append(int(np.count_nonzero(constraints[k](x))))
    per_scenario = per_scenario + np.asarray(prob.terminal_cost(x), dtype=float)
    if not np.all(np.isfinite(per_scenario)):
        s = _first_bad(per_scenario)[0]
        raise NumericalError(f"non-finite cost at scenario {s}")
    return float(np.sum(per_scenario)), tuple(counts)


def _control_levels(grid_arr: np.ndarray, state_ndim: int):
    # Two broadcast layouts of the grid: one aligned with x[:, None, ...]
    # state arrays of shape (prefixes, 1, scenarios[, n]) for the dynamics,
    # one aligned with the (prefixes, grid, scenarios) batch for the costs.
    # Control components (if any) stay trailing in both.
    tail = grid_arr.shape[1:]
    pad = state_ndim + 1 - 2 - len(tail)
    if pad < 1:
        raise ConfigError(
            "vector control values require the vector-state convention "
            "(states with a trailing component axis)"
        )
    g = len(grid_arr)
    u_state = grid_arr.reshape((1, g) + (1,) * pad + tail)
    u_batch = grid_arr.reshape((1, g, 1) + tail)
    return u_state, u_batch


def solve(
    ens: ScenarioEnsemble,
    prob: ScenarioProblem,
    model: StochasticModel,
) -> ScenarioSolution:
    """Exhaustively minimize the scenario-summed cost over all grid sequences.

    Sequences are enumerated in lexicographic grid order.  Among sequences
    meeting every chance-constraint threshold the cheapest wins, ties going
    to the lexicographically earlier sequence.  If none is feasible, the
    fallback picks the sequence maximizing the minimum per-step
    satisfaction count (ties: cost, then lexicographic) and flags it.

    The control tree is expanded one level at a time in cache-sized prefix
    blocks; at the final level each block is reduced straight to
    per-sequence costs, so only the interior state tables are ever
    materialized.  The resulting costs are bit-identical to evaluating
    every sequence separately with :func:`evaluate_sequence`.
    """
    _check_ensemble(ens, prob)
    n, n_s, g = prob.horizon, ens.n_scenarios, len(prob.control_grid)
    if max(g ** (n - 1) * n_s, g**n) > MAX_TABLE_CELLS:
        raise ConfigError(
            f"enumeration table too large for grid {g}, horizon {n}, "
            f"{n_s} scenarios (cap {MAX_TABLE_CELLS} cells); reduce them"
        )
    grid_arr = np.asarray(prob.control_grid, dtype=float)
    constraints = prob.constraints
    thresholds = prob.thresholds
    block = max(1, TILE_CELLS // (g * n_s))

    # states: (prefixes, scenarios[, n]); partial: per-scenario cost (prefixes, scenarios)
    x = ens.initial_states[None, ...]
    partial = np.zeros((1, n_s))
    level_counts: list[np.ndarray] = []
    u_state, u_batch = _control_levels(grid_arr, x.ndim)

    def expand(k: int, lo: int, hi: int):
        """Stage costs, next states and satisfaction counts for one prefix block."""
        xb = x[lo:hi, None, ...]
        stage = np.asarray(prob.stage_cost(xb, u_batch), dtype=float)
        nxt = np.asarray(model.f(xb, u_state, ens.noise[None, None, :, k, ...]), dtype=float)
        if not np.all(np.isfinite(nxt)):
            prefix, choice, s = _first_bad(nxt)[:3]
            raise NumericalError(
                f"non-finite state at scenario {s}, step {k} "
                f"(sequence prefix {(lo + prefix) * g + choice} in grid order)"
            )
        sat = np.count_nonzero(np.asarray(constraints[k](nxt)), axis=-1)
        return stage, nxt, sat

    for k in range(n - 1):
        m_k = x.shape[0]
        new_x = np.empty((m_k * g,) + x.shape[1:])
        new_partial = np.empty((m_k * g, n_s))
        sat_k = np.empty(m_k * g, dtype=np.int64)
        for lo in range(0, m_k, block):
            hi = min(lo + block, m_k)
            stage, nxt, sat = expand(k, lo, hi)
            new_x[lo * g : hi * g] = nxt.reshape((-1,) + x.shape[1:])
            new_partial[lo * g : hi * g] = (partial[lo:hi, None, :] + stage).reshape(-1, n_s)
            sat_k[lo * g : hi * g] = sat.reshape(-1)
        level_counts.append(sat_k)
        x, partial = new_x, new_partial

    # Final level: reduce each block straight to scenario-summed costs.
    m_k = x.shape[0]
    costs = np.empty(m_k * g)
    sat_k = np.empty(m_k * g, dtype=np.int64)
    for lo in range(0, m_k, block):
        hi = min(lo + block, m_k)
        stage, nxt, sat = expand(n - 1, lo, hi)
        totals = (partial[lo:hi, None, :] + stage) + np.asarray(
            prob.terminal_cost(nxt), dtype=float
        )
        if not np.all(np.isfinite(totals)):
            prefix, choice, s = _first_bad(totals)[:3]
            raise NumericalError(
                f"non-finite cost at scenario {s} (sequence {(lo + prefix) * g + choice})"
            )
        costs[lo * g : hi * g] = totals.sum(axis=-1).reshape(-1)
        sat_k[lo * g : hi * g] = sat.reshape(-1)
    level_counts.append(sat_k)

    # Align per-level counts with leaf sequences and apply the thresholds.
    n_seq = g**n
    counts = np.stack(
        [np.repeat(level_counts[k], n_seq // (g ** (k + 1))) for k in range(n)]
    )
    feasible_mask = np.all(counts >= np.asarray(thresholds)[:, None], axis=0)

    if feasible_mask.any():
        idx = int(np.argmin(np.where(feasible_mask, costs, np.inf)))
        feasible, fallback = True, False
    else:
        min_counts = counts.min(axis=0)
        candidates = min_counts == min_counts.max()
        idx = int(np.argmin(np.where(candidates, costs, np.inf)))
        feasible, fallback = False, True

    digits = [(idx // g ** (n - 1 - k)) % g for k in range(n)]
    return ScenarioSolution(
        sequence=tuple(prob.control_grid[d] for d in digits),
        cost=float(costs[idx]),
        per_step_satisfaction=tuple(int(counts[k, idx]) for k in range(n)),
        feasible=feasible,
        fallback_used=fallback,
    )

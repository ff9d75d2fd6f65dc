"""One scenario optimization, dissected.

The optimizer receives a posterior particle set, samples scenario start
states and a frozen noise table from it, then enumerates every control
sequence on the grid.  A sequence is feasible when, at every step, enough
scenarios satisfy the state constraint; the cheapest feasible sequence
wins.  Freezing the noise (common random numbers) makes the whole
enumeration deterministic and repeatable.
"""

import numpy as np

from pmpc import RngStream, ScenarioProblem, Stream, benchmark_model, build_ensemble, evaluate_sequence, solve
from pmpc.filtering import POSTERIOR, ParticleSet

model = benchmark_model()
problem = ScenarioProblem(
    horizon=2,
    stage_cost=lambda x, u: 100.0 * x * x + u * u,
    terminal_cost=lambda x: 100.0 * x * x,
    control_grid=tuple(float(u) for u in range(-5, 6)),
    constraint=lambda x: x >= 1.0,     # state floor, chance-constrained
    epsilon=0.1,                        # at most 10% of scenarios may violate
    n_scenarios=500,
)
print(f"sequences to enumerate: {len(problem.control_grid) ** problem.horizon}")
print(f"required satisfied scenarios per step: {problem.thresholds}")

# A posterior that straddles the constraint: mass between 1.1 and 2.2.
particles = np.linspace(1.1, 2.2, 60)
posterior = ParticleSet(particles, np.full(60, 1.0 / 60.0), POSTERIOR)

ensemble = build_ensemble(posterior, problem, model, RngStream(0, Stream.SCENARIO))
solution = solve(ensemble, problem, model)
print(f"\noptimal sequence  : {solution.sequence}")
print(f"scenario-summed cost: {solution.cost:.1f}")
print(f"satisfied per step : {solution.per_step_satisfaction} of {problem.n_scenarios}")
print(f"feasible           : {solution.feasible}")

# The optimum beats hand-picked alternatives under the same frozen noise.
for candidate in [(0.0, 0.0), (-5.0, -5.0), (2.0, -1.0)]:
    cost, counts = evaluate_sequence(candidate, ensemble, problem, model)
    feasible = all(c >= t for c, t in zip(counts, problem.thresholds))
    print(f"candidate {candidate}: cost {cost:10.1f}, satisfied {counts}, feasible {feasible}")

"""The full output-feedback loop on the built-in benchmark system.

The plant is nominally unstable with control authority that vanishes at
the constraint floor x = 1, observed through a cubic measurement under
heavy noise.  Each step: measure, reweight and resample the particles,
re-sample scenarios from the posterior, enumerate control sequences, apply
the first control of the best sequence.
"""

from pmpc import RunConfig, run_closed_loop

cfg = RunConfig(
    model_name="benchmark",
    horizon=3,
    particles=2000,      # raise to 5000 for the reference configuration
    scenarios=400,       # raise to 1000 for the reference configuration
    epsilon=0.1,
    steps=30,
    seed=0,
)
trace, metrics = run_closed_loop(cfg)

print(" t   x_true        y     u   pf_mean   [ 2.5%, 97.5%]   ess    ok")
for i in range(len(trace)):
    print(
        f"{trace.t[i]:2d}  {trace.x_true[i]:6.2f}  {trace.y[i]:+8.2f}  "
        f"{trace.u[i]:+4.0f}  {trace.pf_mean[i]:7.2f}   "
        f"[{trace.pf_q025[i]:5.2f}, {trace.pf_q975[i]:5.2f}]  {trace.ess[i]:5.0f}  "
        f"{'.' if trace.constraint_ok[i] else 'VIOLATION'}"
    )

print(f"\nviolations of the x >= 1 floor : {metrics.violation_count} / {metrics.steps}")
print(f"total realized cost            : {metrics.total_realized_cost:.0f}")
print(f"mean effective sample size     : {metrics.mean_ess:.0f} of {cfg.particles}")
print(f"mean controller time per step  : {metrics.mean_step_seconds * 1e3:.1f} ms")

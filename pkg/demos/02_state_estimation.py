"""Particle filtering on a linear-Gaussian model, scored against the exact filter.

On linear-Gaussian dynamics the conditional state density is exactly
Gaussian and the closed-form recursion gives its true mean and variance.
The particle filter approximates the same density by weighted samples, so
running both side by side shows the Monte Carlo error directly.
"""

import numpy as np

from pmpc import (
    RngStream,
    Stream,
    init_particles,
    kalman_filter,
    linear_gaussian,
    measure,
    measurement_update,
    resample,
    step,
    time_update,
)

SEED, STEPS, N_PARTICLES = 0, 50, 5000
A, B, Q, R = 0.9, 1.0, 1.0, 1.0
model = linear_gaussian(A, B, Q, R, x0_mean=0.0, x0_var=1.0)
controls = np.sin(0.3 * np.arange(STEPS))

# Simulate one fixed input/measurement record from the true-system streams.
w_rng = RngStream(SEED, Stream.TRUE_PROCESS)
v_rng = RngStream(SEED, Stream.TRUE_MEASUREMENT)
x = model.x0_law.sample(RngStream(SEED, Stream.TRUE_INIT))
truth, measurements = [], []
for t in range(STEPS):
    truth.append(x)
    measurements.append(float(measure(model, x, model.v_law.sample(v_rng))))
    x = float(step(model, x, controls[t], model.w_law.sample(w_rng)))

# Particle filter: weight by likelihood, resample, propagate.
prior = init_particles(model, N_PARTICLES, RngStream(SEED, Stream.FILTER_INIT))
resample_rng = RngStream(SEED, Stream.RESAMPLING)
process_rng = RngStream(SEED, Stream.FILTER_PROCESS)
pf_means = []
for t in range(STEPS):
    weighted = measurement_update(prior, model, measurements[t])
    pf_means.append(float(np.average(weighted.particles, weights=weighted.weights)))
    posterior = resample(weighted, resample_rng)
    prior = time_update(posterior, model, controls[t], process_rng)

kf_means, kf_vars = kalman_filter(A, B, Q, R, 0.0, 1.0, controls, measurements)

err_pf = np.mean(np.abs(np.asarray(pf_means) - kf_means))
rmse_kf = np.sqrt(np.mean((kf_means - np.asarray(truth)) ** 2))
rmse_pf = np.sqrt(np.mean((np.asarray(pf_means) - np.asarray(truth)) ** 2))
print(f"particle filter vs exact posterior mean: mean |gap| {err_pf:.4f}")
print(f"RMSE vs truth: exact filter {rmse_kf:.3f}, particle filter {rmse_pf:.3f}")
print("\n t   truth   measured   exact mean   particle mean")
for t in range(0, STEPS, 10):
    print(
        f"{t:2d}  {truth[t]:+.3f}   {measurements[t]:+7.3f}   "
        f"{kf_means[t]:+9.3f}   {pf_means[t]:+12.3f}"
    )

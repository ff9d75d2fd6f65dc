"""Particle approximation of the conditional state density.

The filter cycles through likelihood weighting of the prior particles,
systematic resampling into an evenly weighted posterior, and propagation
through the transition map with fresh process noise.  Resampling happens
unconditionally every step; the effective sample size is recorded as a
diagnostic only.

Particles are stored as ``(N_p,)`` arrays for scalar models and
``(N_p, n)`` arrays for vector models, matching the model shape contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .densities import RngStream
from .errors import DegenerateWeights, NumericalError
from .models import StochasticModel, step

__all__ = [
    "PRIOR",
    "POSTERIOR",
    "ParticleSet",
    "FilterStats",
    "init_particles",
    "measurement_update",
    "resample",
    "time_update",
    "stats",
]

PRIOR: Literal["prior"] = "prior"
POSTERIOR: Literal["posterior"] = "posterior"

#: Raw likelihood floor below which a measurement update is declared degenerate.
DEGENERACY_FLOOR = 1e-300

#: Normalized weights must sum to one within this drift.
WEIGHT_SUM_TOL = 1e-12


@dataclass
class ParticleSet:
    """Weighted particle representation of the state density.

    ``kind`` tags where the set sits in the filter cycle: ``"prior"``
    particles have been propagated but not conditioned on the current
    measurement, ``"posterior"`` particles are the evenly weighted output
    of resampling.  Arrays are treated as immutable once wrapped.
    """

    particles: np.ndarray
    weights: np.ndarray
    kind: Literal["prior", "posterior"]

    def __post_init__(self) -> None:
        self.particles = np.asarray(self.particles, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.particles.ndim not in (1, 2) or len(self.particles) == 0:
            raise ValueError("particles must be a nonempty (N_p,) or (N_p, n) array")
        if self.weights.shape != (len(self.particles),):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match {len(self.particles)} particles"
            )
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0.0):
            raise ValueError("weights must be finite and nonnegative")
        if self.kind not in (PRIOR, POSTERIOR):
            raise ValueError(f"unknown particle-set kind {self.kind!r}")

    @property
    def count(self) -> int:
        return len(self.particles)


@dataclass
class FilterStats:
    """Summary of a weighted particle set.

    ``quantile_lo``/``quantile_hi`` are the weighted 2.5% and 97.5%
    empirical quantiles, bracketing the filter's 95% confidence band.
    ``degenerate`` is set by the caller when the producing update had to
    fall back to uniform weights.
    """

    mean: float | np.ndarray
    quantile_lo: float | np.ndarray
    quantile_hi: float | np.ndarray
    effective_sample_size: float
    degenerate: bool = False


def _uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def init_particles(model: StochasticModel, n_p: int, rng: RngStream) -> ParticleSet:
    """Draw ``n_p`` i.i.d. particles from the initial-state law, evenly weighted."""
    if n_p < 1:
        raise ValueError(f"particle count must be >= 1, got {n_p}")
    particles = np.asarray(model.x0_law.sample(rng, n_p), dtype=float)
    return ParticleSet(particles, _uniform_weights(n_p), PRIOR)


def measurement_update(ps: ParticleSet, model: StochasticModel, y) -> ParticleSet:
    """Reweight prior particles by the likelihood of the measurement ``y``.

    Weights become proportional to ``meas_likelihood(y, particle)`` and are
    normalized to sum to one; the particles themselves are unchanged.
    Incoming weights are expected to be uniform (as produced by
    :func:`init_particles` and :func:`time_update`) and enter the update
    multiplicatively, so non-uniform inputs are still handled correctly.

    Raises:
        DegenerateWeights: if every raw likelihood lies below
            ``DEGENERACY_FLOOR``; callers should then coast on the prior
            with uniform weights and flag the step.
    """
    if ps.kind != PRIOR:
        raise ValueError("measurement update expects a prior-kind particle set")
    raw = np.asarray(model.meas_likelihood(y, ps.particles), dtype=float)
    if raw.shape != (ps.count,):
        raise ValueError(f"likelihood returned shape {raw.shape}, expected ({ps.count},)")
    if not np.all(np.isfinite(raw)) or np.any(raw < 0.0):
        raise NumericalError("measurement likelihood produced a negative or non-finite value")
    if not np.any(raw >= DEGENERACY_FLOOR):
        raise DegenerateWeights(
            f"all {ps.count} particle likelihoods underflowed for measurement y={y!r}"
        )
    weights = ps.weights * raw
    weights = weights / weights.sum()
    return ParticleSet(ps.particles, weights, PRIOR)


def resample(ps: ParticleSet, rng: RngStream) -> ParticleSet:
    """Systematic resampling into an evenly weighted posterior set.

    One uniform offset stratifies ``N_p`` selection points at spacing
    ``1/N_p``, so particle ``p`` is selected either ``floor(N_p q_p)`` or
    ``ceil(N_p q_p)`` times; with uniform weights the output is exactly a
    permutation of the input.
    """
    total = ps.weights.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"resampling expects normalized weights, got sum {total!r}")
    n = ps.count
    cum = np.cumsum(ps.weights)
    cum[-1] = 1.0  # guard against cumulative round-off
    positions = (rng.generator.random() + np.arange(n)) / n
    idx = np.searchsorted(cum, positions, side="right")
    return ParticleSet(ps.particles[idx], _uniform_weights(n), POSTERIOR)


def time_update(
    ps: ParticleSet, model: StochasticModel, u, rng: RngStream
) -> ParticleSet:
    """Propagate posterior particles through the dynamics with fresh noise.

    All ``N_p`` process-noise draws are taken from ``rng`` in particle
    index order up front, so the result does not depend on how the
    propagation itself is scheduled.
    """
    if ps.kind != POSTERIOR:
        raise ValueError("time update expects a posterior-kind particle set")
    size = ps.count if model.w_law.dim == 1 else (ps.count,)
    w = model.w_law.sample(rng, size)
    particles = np.asarray(step(model, ps.particles, u, w), dtype=float)
    return ParticleSet(particles, _uniform_weights(ps.count), PRIOR)


def _weighted_quantiles(values: np.ndarray, weights: np.ndarray, levels) -> np.ndarray:
    """Weighted empirical quantiles with midpoint interpolation.

    Particles are sorted and placed at their cumulative weight minus half
    their own weight; quantile levels are linearly interpolated between
    those midpoints and clamped to the extreme particles outside them.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = weights[order]
    mid = np.cumsum(w) - 0.5 * w
    return np.interp(levels, mid, v)


def stats(ps: ParticleSet, degenerate: bool = False) -> FilterStats:
    """Weighted mean, 95% band and effective sample size of a particle set.

    The band uses the midpoint-interpolated quantiles at 2.5% and 97.5%,
    widened minimally to include the weighted mean.  Widening only
    triggers for near-degenerate weight profiles (almost all mass on one
    particle plus a remote light particle), where raw quantiles can
    exclude the mean; the guarantee ``quantile_lo <= mean <= quantile_hi``
    keeps the band usable as a confidence envelope around the estimate.
    """
    w = ps.weights / ps.weights.sum()
    ess = float(1.0 / np.sum(w * w))
    mean = np.average(ps.particles, weights=w, axis=0)
    levels = np.array([0.025, 0.975])
    if ps.particles.ndim == 1:
        lo, hi = _weighted_quantiles(ps.particles, w, levels)
        return FilterStats(
            float(mean), min(float(lo), float(mean)), max(float(hi), float(mean)), ess, degenerate
        )
    bands = np.stack(
        [_weighted_quantiles(ps.particles[:, i], w, levels) for i in range(ps.particles.shape[1])],
        axis=1,
    )
    return FilterStats(
        mean, np.minimum(bands[0], mean), np.maximum(bands[1], mean), ess, degenerate
    )

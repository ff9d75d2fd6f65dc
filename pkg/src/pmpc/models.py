"""Stochastic state-space models: ``x+ = f(x, u, w)``, ``y = h(x, v)``.

Shape conventions
-----------------
Scalar models (``n == 1``) represent states, outputs and noise as plain
floats or arrays without a component axis; vector models carry a trailing
component axis of size ``n`` (states), ``m`` (controls) or the noise
dimension.  All model callables must broadcast over arbitrary leading
batch axes: the filter calls them on ``(N_p, ...)`` arrays and the
scenario optimizer on ``(sequences, scenarios, ...)`` arrays.  Costs,
constraint predicates and measurement likelihoods consume the component
axis (vector models) and return one value per batch element.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .densities import Density, Gaussian, Uniform
from .errors import ConfigError, NumericalError

__all__ = [
    "StochasticModel",
    "step",
    "measure",
    "additive_measurement",
    "benchmark_model",
    "linear_gaussian",
]


@dataclass(frozen=True)
class StochasticModel:
    """Immutable bundle of maps and laws defining a controlled Markov model.

    Attributes:
        n: State dimension.
        m: Control dimension.
        f: Transition map ``f(x, u, w) -> next state``; pure and
            broadcast-vectorized.
        h: Measurement map ``h(x, v) -> output``; pure and
            broadcast-vectorized.
        w_law: Process-noise law (one draw per transition).
        v_law: Measurement-noise law (one draw per output).
        x0_law: Initial-state law; doubles as the filter's initial prior.
        meas_likelihood: ``(y, x) -> pdf(y | x)``, nonnegative and finite;
            for additive noise ``h(x, v) = g(x) + v`` this is exactly
            ``v_law.pdf(y - g(x))`` (see :func:`additive_measurement`).
        name: Registry name used by run configurations.
    """

    n: int
    m: int
    f: Callable
    h: Callable
    w_law: Density
    v_law: Density
    x0_law: Density
    meas_likelihood: Callable
    name: str = ""


def _describe(value) -> str:
    arr = np.asarray(value)
    if arr.size <= 4:
        return np.array2string(arr, precision=6)
    bad = np.argwhere(~np.isfinite(arr))
    where = tuple(bad[0]) if bad.size else "?"
    return f"array{arr.shape}, first non-finite at {where}"


def step(model: StochasticModel, x, u, w):
    """Advance the state through the transition map, checking finiteness.

    Inputs are coerced to numpy so that overflow yields inf (caught here as
    :class:`NumericalError`) instead of a raw Python ``OverflowError``.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        out = model.f(np.asarray(x, dtype=float), u, np.asarray(w, dtype=float))
    if not np.all(np.isfinite(out)):
        raise NumericalError(
            "transition map returned a non-finite value "
            f"(x={_describe(x)}, u={_describe(u)}, w={_describe(w)})"
        )
    return out


def measure(model: StochasticModel, x, v):
    """Evaluate the measurement map, checking finiteness."""
    with np.errstate(over="ignore", invalid="ignore"):
        out = model.h(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    if not np.all(np.isfinite(out)):
        raise NumericalError(
            f"measurement map returned a non-finite value (x={_describe(x)}, v={_describe(v)})"
        )
    return out


def additive_measurement(g: Callable, v_law: Density) -> Callable:
    """Likelihood for measurements of the form ``y = g(x) + v``."""

    def likelihood(y, x):
        return v_law.pdf(y - g(x))

    return likelihood


def benchmark_model(
    w: Density | None = None,
    v: Density | None = None,
    x0: Density | None = None,
) -> StochasticModel:
    """Nominally unstable scalar nonlinear system used by the closed-loop harness.

    Dynamics ``x+ = 1.5 x + atan((x - 1)^2) u + w`` with measurement
    ``y = x^3 - x + v``; defaults w ~ U(-2, 2), v ~ N(0, 5), x0 ~ U(1, 2).
    The control gain ``atan((x - 1)^2)`` vanishes at ``x = 1`` and the
    measurement map has a stationary region around ``|x| = 1/sqrt(3)``, so
    holding the state above a floor near 1 under this noise level is a
    deliberately hard regulation problem.  Registered in run configs as
    ``"benchmark"`` (alias ``"paper_example"``).

    The noise and initial-state laws can be overridden, e.g. with point
    masses to obtain a deterministic variant for oracle tests.
    """
    w_law = Uniform(-2.0, 2.0) if w is None else w
    v_law = Gaussian(0.0, 5.0) if v is None else v
    x0_law = Uniform(1.0, 2.0) if x0 is None else x0

    def f(x, u, w):
        return 1.5 * x + np.arctan((x - 1.0) ** 2) * u + w

    def g(x):
        return x**3 - x

    def h(x, v):
        return g(x) + v

    return StochasticModel(
        n=1,
        m=1,
        f=f,
        h=h,
        w_law=w_law,
        v_law=v_law,
        x0_law=x0_law,
        meas_likelihood=additive_measurement(g, v_law),
        name="benchmark",
    )


def linear_gaussian(
    a: float = 0.9,
    b: float = 1.0,
    q: float = 1.0,
    r: float = 1.0,
    x0_mean: float = 0.0,
    x0_var: float = 1.0,
) -> StochasticModel:
    """Scalar linear-Gaussian model ``x+ = a x + b u + w``, ``y = x + v``.

    w ~ N(0, q), v ~ N(0, r), x0 ~ N(x0_mean, x0_var).  The exact posterior
    recursion is available in closed form (:mod:`pmpc.kalman`), which makes
    this the reference model for validating the particle filter.
    """
    if q <= 0.0 or r <= 0.0 or x0_var <= 0.0:
        raise ConfigError(
            f"linear_gaussian requires q, r, x0_var > 0, got q={q}, r={r}, x0_var={x0_var}"
        )
    v_law = Gaussian(0.0, r)

    def f(x, u, w):
        return a * x + b * u + w

    def g(x):
        return x

    def h(x, v):
        return g(x) + v

    return StochasticModel(
        n=1,
        m=1,
        f=f,
        h=h,
        w_law=Gaussian(0.0, q),
        v_law=v_law,
        x0_law=Gaussian(x0_mean, x0_var),
        meas_likelihood=additive_measurement(g, v_law),
        name="linear_gaussian",
    )

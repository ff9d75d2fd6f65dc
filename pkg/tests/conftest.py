import numpy as np
import pytest

from pmpc import PointMass, RngStream, StochasticModel, additive_measurement, benchmark_model


@pytest.fixture
def bench():
    return benchmark_model()


@pytest.fixture
def rng():
    return RngStream(12345, 0)


def deterministic_linear_model(a: float = 1.0, b: float = 1.0) -> StochasticModel:
    """Noise-free ``x+ = a x + b u`` with identity measurement ``y = x``.

    Point-mass noise laws make the model usable as an exact oracle target:
    the indicator likelihood is 1 only where a particle sits on the
    measured state.
    """
    v_law = PointMass(0.0)

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
        w_law=PointMass(0.0),
        v_law=v_law,
        x0_law=PointMass(1.0),
        meas_likelihood=additive_measurement(g, v_law),
        name="deterministic_linear",
    )


@pytest.fixture
def det_linear():
    return deterministic_linear_model()

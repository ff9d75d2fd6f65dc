"""Probability-density primitives and reproducible random streams.

Every stochastic quantity in the package (initial states, process and
measurement noise, scenario sampling, resampling offsets) is expressed
through the small family of laws defined here and drawn from a seeded
:class:`RngStream`.  Scalar laws sample plain floats (or 1-D arrays when a
``size`` is given); vector laws are products of independent scalar laws
and carry a trailing component axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "Density",
    "Uniform",
    "Gaussian",
    "PointMass",
    "Product",
    "RngStream",
    "Stream",
    "density_from_config",
]

#: Half-width of the indicator window used by the point-mass pdf.
POINT_MASS_TOL = 1e-12

_MASK64 = (1 << 64) - 1


class Stream(enum.IntEnum):
    """Fixed stream-id partition, one id per independent source of randomness.

    True-system draws are separated from controller-side draws so that
    changing estimator or optimizer parameters (particle count, scenario
    count, horizon) never perturbs the realized trajectory noise.
    """

    TRUE_INIT = 0
    TRUE_PROCESS = 1
    TRUE_MEASUREMENT = 2
    FILTER_INIT = 3
    FILTER_PROCESS = 4
    RESAMPLING = 5
    SCENARIO = 6


class RngStream:
    """Counter-based random stream keyed by ``(seed, stream)``.

    Equal keys yield bit-identical draw sequences across runs and
    platforms (Philox under the hood).  Instances are stateful and must
    not be shared across concurrent workers; give each worker its own
    stream id instead.
    """

    def __init__(self, seed: int, stream: int = 0) -> None:
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.random.SeedSequence([self.seed & _MASK64, self.stream & _MASK64])
        self.generator = np.random.Generator(np.random.Philox(key))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream})"


@dataclass(frozen=True)
class Density:
    """Base class for sampleable, evaluable probability laws."""

    @property
    def dim(self) -> int:
        return 1

    def sample(self, rng: RngStream, size=None):
        """Draw from the law, advancing ``rng`` deterministically.

        With ``size=None`` a scalar float is returned; otherwise an array
        of the given shape (vector laws append their component axis).
        """
        raise NotImplementedError

    def pdf(self, x):
        """Density value at ``x``; vectorized, nonnegative and finite everywhere."""
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(Density):
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ConfigError(f"uniform bounds must be finite, got ({self.lo}, {self.hi})")
        if not self.lo < self.hi:
            raise ConfigError(f"uniform law requires lo < hi, got ({self.lo}, {self.hi})")

    def sample(self, rng: RngStream, size=None):
        return rng.generator.uniform(self.lo, self.hi, size)

    def pdf(self, x):
        x = np.asarray(x)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)


@dataclass(frozen=True)
class Gaussian(Density):
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ConfigError(f"gaussian parameters must be finite, got ({self.mean}, {self.variance})")
        if self.variance <= 0.0:
            raise ConfigError(f"gaussian law requires variance > 0, got {self.variance}")

    def sample(self, rng: RngStream, size=None):
        return rng.generator.normal(self.mean, math.sqrt(self.variance), size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = x - self.mean
        return np.exp(-0.5 * z * z / self.variance) / math.sqrt(2.0 * math.pi * self.variance)


@dataclass(frozen=True)
class PointMass(Density):
    """Degenerate law at a single value.

    The pdf is an indicator (1 within ``POINT_MASS_TOL`` of the value, else
    0) rather than a delta spike.  That keeps likelihood normalization
    finite for noise-free test models; point masses are meant for
    deterministic oracles, not as measurement-noise laws in filtering.
    """

    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ConfigError(f"point mass requires a finite value, got {self.value}")

    def sample(self, rng: RngStream, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value, dtype=float)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x - self.value) <= POINT_MASS_TOL, 1.0, 0.0)


@dataclass(frozen=True)
class Product(Density):
    """Product of independent scalar laws; samples carry a trailing component axis."""

    components: tuple[Density, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ConfigError("product law requires at least one component")
        for c in comps:
            if c.dim != 1:
                raise ConfigError("product components must be scalar laws")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    def sample(self, rng: RngStream, size=None):
        cols = [np.asarray(c.sample(rng, size)) for c in self.components]
        return np.stack(cols, axis=-1)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected trailing axis of size {self.dim}, got shape {x.shape}")
        out = self.components[0].pdf(x[..., 0])
        for i, c in enumerate(self.components[1:], start=1):
            out = out * c.pdf(x[..., i])
        return out


_TAGS = {"uniform", "gaussian", "point_mass", "product"}


def density_from_config(record) -> Density:
    """Build a density from its tagged-record form.

    Examples: ``{"type": "uniform", "lo": -2, "hi": 2}``,
    ``{"type": "gaussian", "mean": 0, "variance": 5}``,
    ``{"type": "point_mass", "value": 0}``,
    ``{"type": "product", "components": [...]}``.
    """
    if not isinstance(record, dict):
        raise ConfigError(f"density record must be an object, got {type(record).__name__}")
    tag = record.get("type")
    if tag not in _TAGS:
        raise ConfigError(f"unknown density type {tag!r}; expected one of {sorted(_TAGS)}")
    fields = {k: v for k, v in record.items() if k != "type"}
    try:
        if tag == "uniform":
            return Uniform(**fields)
        if tag == "gaussian":
            return Gaussian(**fields)
        if tag == "point_mass":
            return PointMass(**fields)
        return Product(tuple(density_from_config(c) for c in fields.pop("components")), **fields)
    except TypeError as exc:
        raise ConfigError(f"bad fields for density type {tag!r}: {exc}") from exc

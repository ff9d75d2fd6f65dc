"""Exception types shared across the package."""


class PmpcError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PmpcError, ValueError):
    """Invalid configuration values or construction parameters."""


class NumericalError(PmpcError, ArithmeticError):
    """A model, cost or likelihood evaluation produced a non-finite value."""


class DegenerateWeights(PmpcError, RuntimeError):
    """Every particle likelihood underflowed; the measurement carries no usable weight."""

"""Exception types shared across the package."""


class UndefinedPriceError(ValueError):
    """Price is undefined because supply is zero (every agent is a buyer)."""


class DegenerateDistributionError(ValueError):
    """A computation requires a distribution with mass on usable states."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class InsufficientDataError(ValueError):
    """Not enough samples to compute the requested statistic."""


class EmptySeriesError(InsufficientDataError):
    """A return series could not be formed from the given trajectory."""

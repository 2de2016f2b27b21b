"""Exception types raised across the package."""


class ForestFireError(Exception):
    """Base class for all package errors."""


class DomainError(ForestFireError, ValueError):
    """Argument outside the domain where a quantity is defined."""


class EmptyRequestError(ForestFireError, ValueError):
    """A sampler or statistic was asked for zero items."""


class BudgetError(ForestFireError):
    """A computation would exceed its configured size or precision budget."""


class PrecisionError(BudgetError):
    """Required working precision exceeds the allowed maximum."""


class QuadratureError(ForestFireError):
    """Adaptive quadrature failed to reach its tolerance.

    The best estimate and its error bound are kept on the exception so a
    caller can decide whether the result is still usable.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(f"{message} (estimate={estimate}, error bound={error_bound})")
        self.estimate = estimate
        self.error_bound = error_bound

"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MultiInfoError(ValueError):
    """Base class for every error raised by this package."""


class ValidationError(MultiInfoError):
    """Input violates a documented precondition."""


class BudgetError(MultiInfoError):
    """An enumeration would exceed its configured size budget."""


class NoMaximizerError(MultiInfoError):
    """The hub unit is too small for a global maximizer to exist."""

    def __init__(self, message: str, n_hub: int, n_min: int):
        super().__init__(message)
        self.n_hub = n_hub
        self.n_min = n_min

    @property
    def deficit(self) -> int:
        return self.n_min - self.n_hub


class NotAMaximizerError(MultiInfoError):
    """A construction that needs a global maximizer was given something else."""


class ConvergenceError(MultiInfoError):
    """An iterative routine stopped before meeting its tolerance.

    ``best`` holds the best iterate found (or a trace object), ``residual``
    the stopping quantity at that iterate.
    """

    def __init__(self, message: str, best=None, residual: float = float("nan"), **extra):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.extra = extra

"""Exception types shared across the modules."""

from __future__ import annotations


class DomainError(ValueError):
    """An input lies outside the domain of a formula."""


class ResolutionError(ValueError):
    """A grid is too coarse for the geometry it should resolve."""


class SingularityError(ZeroDivisionError):
    """A formula hit an exact pole."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (bad key, step size, range)."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, blow-up)."""

    def __init__(self, message: str, residual: float | None = None,
                 time: float | None = None):
        super().__init__(message)
        self.residual = residual
        self.time = time


class SearchError(RuntimeError):
    """A calibration target was not bracketed by the search range."""

    def __init__(self, message: str, bounds: tuple[float, float] | None = None):
        super().__init__(message)
        self.bounds = bounds


class ConsistencyError(RuntimeError):
    """An internal invariant (e.g. positivity of a density matrix) failed."""

"""Exception types shared across the library.

Every error raised by investgame derives from :class:`InvestGameError`,
so callers can catch the whole family with one clause.  The CLI maps the
subclasses onto distinct process exit codes.
"""


class InvestGameError(Exception):
    """Base class for all investgame errors."""


class DomainError(InvestGameError):
    """A quantity is outside its mathematical domain (non-PD covariance,
    nonpositive risk aversion, time outside the horizon, ...)."""


class DimensionError(InvestGameError):
    """Array shapes or agent counts are inconsistent."""


class DataError(InvestGameError):
    """Input data (price panels, CSV/JSON files) is malformed."""


class NetworkError(InvestGameError):
    """An influence matrix violates the row-stochastic contract."""


class ConfigError(InvestGameError):
    """A solver/simulation configuration value is invalid."""


class SolverError(InvestGameError):
    """The equilibrium system could not be solved (singular system)."""


class ConvergenceError(SolverError):
    """Fixed-point iteration exhausted its iteration budget.

    Carries the last iterate in ``partial`` so callers can inspect or
    dump it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class OracleError(InvestGameError):
    """The discretized best-response oracle failed to converge."""


class DegenerateError(InvestGameError):
    """A decomposition is undefined for the given inputs (e.g. an agent's
    risk aversion equals the asymptotic one)."""

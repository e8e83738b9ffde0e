"""Exception types raised by supbound."""


class SupboundError(Exception):
    """Base class for all library errors."""


class InvalidParameter(SupboundError, ValueError):
    pass


class NonConvergence(SupboundError, ArithmeticError):
    pass


class InverseOverflow(SupboundError, OverflowError):
    """Z^{-1}(v) would overflow a double; the caller must clamp v."""


class UnsupportedMeasure(SupboundError, TypeError):
    pass


class BelowThreshold(SupboundError, ValueError):
    """Level u does not exceed the feasibility threshold of the bound."""


class Infeasible(SupboundError, ValueError):
    """No theta on the search grid makes u feasible."""

    def __init__(self, message, min_feasible_u=None):
        super().__init__(message)
        self.min_feasible_u = min_feasible_u


class SWindowEmpty(SupboundError, ValueError):
    pass


class SeriesDiverges(SupboundError, ArithmeticError):
    pass


class SchemaError(SupboundError, ValueError):
    """An input file does not have the expected columns."""

"""Exception types raised across the package."""


class NomaError(Exception):
    """Base class for package errors."""


class InvalidAssignment(NomaError, ValueError):
    """A channel assignment violates the one-channel-per-user or
    two-entities-per-channel constraint."""


class InfeasibleQoS(NomaError, ValueError):
    """Minimum-rate constraints cannot be met with the available power."""


# name used by the per-pair power split
QosInfeasible = InfeasibleQoS


class ProblemTooLarge(NomaError, ValueError):
    """Exhaustive enumeration requested above its size bound."""


class NumericalDivergence(NomaError, FloatingPointError):
    """Amplitude integration blew up (step too large for the coupling)."""

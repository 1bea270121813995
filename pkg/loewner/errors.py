"""
Error types raised by the annulus solver

Every failure the CLI maps to an exit code derives from LoewnerError.
"""
from typing import Optional


class LoewnerError(Exception):
    """Base class for solver errors"""


class ArgumentError(LoewnerError, ValueError):
    """Input outside the documented domain of an operation"""


class DomainError(LoewnerError, ValueError):
    """A point lies outside the region where a formula is defined"""


class QuadratureBudgetError(LoewnerError):
    """Adaptive integration could not reach the requested tolerance"""

    def __init__(self, message: str, best: Optional[float] = None, abs_error: Optional[float] = None):
        super().__init__(message)
        self.best = best
        self.abs_error = abs_error


class UnboundedBracketError(LoewnerError):
    """Bracket expansion ran past its limit without a sign change"""


class RegimeError(LoewnerError):
    """Operation called for data outside its regime"""


class InconsistentDataError(LoewnerError):
    """Boundary data admit no solution of the requested kind"""


class ConsistencyError(LoewnerError):
    """A constructed object violates its own invariants"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index  # first offending sample, when one can be named


class InsufficientResolutionError(LoewnerError):
    """Too few samples for a fit inside the requested window"""


class NoSingularAnchorError(LoewnerError):
    """Profile has neither a jump nor a singular endpoint"""


class CertificationError(LoewnerError):
    """Jump data do not yield a strict touching certificate"""


class ProfileFormatError(LoewnerError):
    """Malformed profile file"""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row

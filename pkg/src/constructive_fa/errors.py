"""Exception hierarchy shared by all modules."""

__all__ = [
    "ToolkitError",
    "InvalidExponentError",
    "SpaceMismatchError",
    "EmptySelectionError",
    "DegenerateClassError",
    "OracleViolationError",
    "PreconditionError",
    "ResolutionError",
    "InsufficientDensityError",
    "CertificateError",
    "ScenarioError",
]


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidExponentError(ToolkitError, ValueError):
    pass


class SpaceMismatchError(ToolkitError, ValueError):
    """An element does not live in the space an operator expects."""


class EmptySelectionError(ToolkitError):
    """A selector was asked to choose from data that offers nothing."""


class DegenerateClassError(ToolkitError, ValueError):
    """The zero class of a quotient space was passed where a nonzero one is needed."""


class OracleViolationError(ToolkitError):
    pass


class PreconditionError(ToolkitError, ValueError):
    """Inputs violate a stated precondition of an operation."""


class ResolutionError(ToolkitError, ValueError):
    """Grid spacing too coarse to resolve a kernel."""


class InsufficientDensityError(ToolkitError):
    """No prefix of a dense list achieves the requested covering."""


class CertificateError(ToolkitError):
    """A certified inequality failed.

    ``n`` names the offending index when there is one; ``detail`` carries
    whatever partial evidence was computed (table rows, offending pair, ...).
    """

    def __init__(self, message, n=None, detail=None):
        super().__init__(message)
        self.n = n
        self.detail = detail


class ScenarioError(ToolkitError):
    """Malformed or inconsistent scenario input."""

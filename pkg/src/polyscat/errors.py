"""Exception hierarchy shared by every module of the package."""


class PolyscatError(Exception):
    """Base class for all package errors."""


class ValidationError(PolyscatError):
    """A scatterer or input file failed structural validation."""

    def __init__(self, message, field=None, report=None):
        super().__init__(message)
        self.field = field
        self.report = report


class ParameterError(PolyscatError, ValueError):
    """An argument lies outside the domain of the operation."""


class DomainError(PolyscatError, ValueError):
    """An evaluation point or probe region intersects a scatterer."""


class SolverError(PolyscatError):
    """The boundary integral solve failed or is untrustworthy."""


class RoutingError(PolyscatError):
    """No exterior path exists with the requested clearance."""

    def __init__(self, message, pinch_point=None):
        super().__init__(message)
        self.pinch_point = pinch_point


class GenerationError(PolyscatError):
    """A randomized generator could not produce a valid output."""


class FitError(PolyscatError):
    """Not enough usable data to fit a law."""


class OutputError(PolyscatError, OSError):
    """An output file could not be written (or an input file read)."""

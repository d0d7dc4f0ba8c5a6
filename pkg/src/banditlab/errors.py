"""Exception types shared across the package."""


class BanditLabError(Exception):
    """Base class for all package errors."""


class StructuralError(BanditLabError):
    """A value does not belong to the structure it was used with."""


class UnsupportedCapabilityError(BanditLabError):
    """The space does not provide the oracle or structure required."""


class ResolutionError(BanditLabError):
    """The requested operation needs finer resolution than the representation has."""


class InvalidScheduleError(BanditLabError):
    """A schedule or parameter sequence violates its validity conditions."""


class ValidationError(BanditLabError):
    """A configuration or descriptor failed validation."""

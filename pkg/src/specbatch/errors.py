"""Exception and warning types shared across the package."""


class SpecbatchError(Exception):
    """Base class for all package errors."""


class DegenerateFitError(SpecbatchError):
    """Raised when a regression has too few distinct points to fit."""


class UnfittableError(SpecbatchError):
    """Raised when no usable data points remain for a fit."""


class UncalibratedBatchError(SpecbatchError):
    """Raised when a batch size is outside the calibrated range and
    interpolation is disabled."""


class HorizonError(SpecbatchError):
    """Raised when a speculation length exceeds the measurement horizon of
    an acceptance trace."""


class ConfigError(SpecbatchError):
    """Raised for invalid experiment or server configuration."""


class CalibrationWarning(UserWarning):
    """Emitted for suspicious but non-fatal calibration results
    (e.g. a non-positive fitted slope)."""

"""Exception and warning types raised across the package."""


class DroughtcastError(Exception):
    """Base class for all package errors."""


class SchemaError(DroughtcastError, ValueError):
    """A file or frame is missing required columns (or has the wrong shape)."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class RowError(DroughtcastError, ValueError):
    """A single input row could not be parsed or violates an invariant."""

    def __init__(self, message, line=None, path=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{':'.join(where)}: {message}" if where else message)
        self.line = line
        self.path = path


class DuplicateKeyError(DroughtcastError, ValueError):
    """The same (fips, date) key appears more than once."""

    def __init__(self, fips, date, message=None):
        super().__init__(message or f"duplicate record for fips={fips} date={date}")
        self.fips = fips
        self.date = date


class ParameterError(DroughtcastError, ValueError):
    """An estimator or operation received an invalid hyperparameter."""


class DomainError(DroughtcastError, ValueError):
    """A numeric input lies outside the domain of the operation."""


class DimensionError(DroughtcastError, ValueError):
    """Feature width does not match what the model was trained on."""


class TrainingError(DroughtcastError, ValueError):
    """Training data cannot support the requested model."""


class DegenerateError(DroughtcastError, ValueError):
    """A fitted model carries no information for the requested quantity."""


class InputError(DroughtcastError, ValueError):
    """Label sequences passed to a metric are inconsistent."""


class ModelFormatError(DroughtcastError, ValueError):
    """A persisted model file is unreadable or incompatible."""


class DataWarning(UserWarning):
    """Recoverable data problem (dropped rows, missing coordinates, ...)."""

"""Exception types shared across the package.

The dataset-file errors are deliberately distinct classes so callers (and
the CLI) can tell a corrupt header from a truncated record without parsing
message strings.
"""


class GsmpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(GsmpError):
    """Vectors of incompatible dimensionality were combined."""


class EmptyInputError(GsmpError):
    """An operation that needs data received none (or too little)."""


class ZeroVectorError(GsmpError):
    """A zero vector cannot be normalized."""


class NotPositiveDefiniteError(GsmpError):
    """Covariance matrix is not positive definite after regularization."""


class CoverageError(GsmpError):
    """A covering-step precondition (all constraint points inside the
    sphere) was violated."""


class ConfigError(GsmpError):
    """Bad run configuration (file or environment)."""


class DatasetFormatError(GsmpError):
    """Base class for dataset file problems."""


class BadMagicError(DatasetFormatError):
    """File does not start with a recognized dataset header."""


class UnsupportedVersionError(DatasetFormatError):
    """Dataset file version is not supported."""


class TruncatedFileError(DatasetFormatError):
    """File ended before the declared record payload."""


class BadRecordError(DatasetFormatError):
    """A record is malformed (unknown role, wrong dimension, bad field)."""

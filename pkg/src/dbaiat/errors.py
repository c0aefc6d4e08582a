"""Exception hierarchy shared by every subpackage.

The CLI maps :class:`DbAiatError` subclasses to exit code 2; anything else
propagates as a genuine bug.
"""


class DbAiatError(Exception):
    """Base class for all errors raised deliberately by this package."""


class DimensionError(DbAiatError, ValueError):
    """Tensor shapes are incompatible for the requested operation."""


class ConfigurationError(DbAiatError, ValueError):
    """A configuration value or call argument combination is invalid."""


class ContractError(DbAiatError, ValueError):
    """A precondition on domain flags or call protocol was violated."""


class InputError(DbAiatError, ValueError):
    """Input data is unusable (empty, silent, mismatched)."""


class FormatError(DbAiatError, ValueError):
    """A file does not follow the accepted on-disk format."""


class CorruptionError(DbAiatError, ValueError):
    """A checkpoint file failed validation."""

    def __init__(self, message, section=None):
        super().__init__(message)
        self.section = section


class VersionError(DbAiatError, ValueError):
    """Checkpoint version or model configuration does not match."""


class NonFiniteError(DbAiatError, FloatingPointError):
    """A NaN or Inf appeared where finite values are required."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where

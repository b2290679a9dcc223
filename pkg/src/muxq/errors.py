"""Exception hierarchy shared across the toolkit.

Configuration problems (bad flags, invalid bit widths, granularity/layout
mismatches) and file-format problems (unreadable dumps) are kept in separate
branches because the CLI maps them to different exit codes.
"""


class MuxqError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MuxqError, ValueError):
    """Invalid configuration, argument, or precondition violation."""


class ShapeError(ConfigError):
    """Operand shapes do not conform."""


class DumpFormatError(MuxqError):
    """Base class for activation-dump parse errors."""


class BadMagicError(DumpFormatError):
    """File does not start with the MUXT magic."""


class UnsupportedVersionError(DumpFormatError):
    """Header declares a format version this reader does not support."""


class HeaderFieldError(DumpFormatError):
    """Header dtype/layout/reserved field holds an unknown value."""


class TruncatedPayloadError(DumpFormatError):
    """File ends before the declared payload (or carries trailing bytes)."""


class NonFinitePayloadError(DumpFormatError):
    """Payload contains NaN or Inf values."""

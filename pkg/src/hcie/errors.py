"""Exception hierarchy.

Every error raised on purpose by this package derives from :class:`HCIEError`,
and the CLI maps each subclass to its own exit code.
"""


class HCIEError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParamError(HCIEError, ValueError):
    """Invalid public parameters, key, or argument values."""

    exit_code = 4


class DimensionError(ParamError):
    """Image, block, or matrix sizes that do not fit together."""


class NotBijectiveError(ParamError):
    """A permutation relationship matrix with repeated destinations."""


class StreamExhaustedError(HCIEError):
    """More keystream bits requested than the stream holds."""

    exit_code = 5


class InconsistentPairsError(HCIEError):
    """Plain/cipher pairs that cannot be related by one permutation."""

    exit_code = 5


class SearchSpaceTooLargeError(ParamError):
    """Brute-force request beyond the configured desk-scale cap."""


class PGMFormatError(HCIEError):
    """Malformed, truncated, or unsupported PGM file."""

    exit_code = 3

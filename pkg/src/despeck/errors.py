"""Exception types shared across the package."""


class DespeckError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DespeckError, ValueError):
    """An argument violates a documented precondition."""


class CalibrationError(DespeckError, ValueError):
    """Monte-Carlo calibration cannot produce reliable thresholds."""


class DegenerateRatioError(DespeckError, ValueError):
    """Every patch of a ratio image is undefined; no quality score exists."""


class RasterFormatError(DespeckError):
    """Base class for stack file format errors. ``code`` identifies the kind."""

    code = "raster-format"


class BadMagicError(RasterFormatError):
    code = "bad-magic"


class HeaderFormatError(RasterFormatError):
    code = "bad-header"


class DimensionMismatchError(RasterFormatError):
    code = "dimension-mismatch"


class TruncatedPayloadError(RasterFormatError):
    code = "truncated-payload"

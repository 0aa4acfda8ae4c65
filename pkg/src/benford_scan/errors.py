"""Exception hierarchy. Every error raised on purpose derives from BenfordScanError."""

from __future__ import annotations


class BenfordScanError(Exception):
    """Base class for all library errors."""


class ImageReadError(BenfordScanError, OSError):
    """The file could not be read from disk."""

    def __init__(self, path, reason: str) -> None:
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")


class ImageDecodeError(BenfordScanError, ValueError):
    """The file was read but is not a decodable PNG/JPEG raster."""

    def __init__(self, path, reason: str) -> None:
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")


class ImageTooSmallError(BenfordScanError, ValueError):
    pass


class InvalidBaseError(BenfordScanError, ValueError):
    pass


class InvalidValueError(BenfordScanError, ValueError):
    pass


class EmptyPmfError(BenfordScanError, ValueError):
    """No coefficient contributed a leading digit (e.g. a perfectly flat image)."""


class InvalidDistributionError(BenfordScanError, ValueError):
    pass


class InvalidParameterError(BenfordScanError, ValueError):
    pass


class UnsupportedCorruptionError(BenfordScanError, ValueError):
    pass


class CalibrationError(BenfordScanError, ValueError):
    pass


class NoInputError(BenfordScanError, ValueError):
    pass


class TableFormatError(BenfordScanError, ValueError):
    pass

"""Exception hierarchy shared by every hometwin stage."""


class HometwinError(Exception):
    """Base class for all hometwin errors."""


class ConfigError(HometwinError):
    """Invalid configuration: unknown key, bad value, missing room, ..."""


class UnknownSensorError(HometwinError, KeyError):
    """A sensor id that is not registered in the home layout."""


class StalenessError(HometwinError):
    """An item arrived for a minute window that was already flushed."""


class WireFormatError(HometwinError):
    """Malformed packet bytes. Carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class VersionError(HometwinError):
    """Unsupported wire or file format version."""


class RangeError(HometwinError):
    """Query range with t0 > t1."""


class DimensionError(HometwinError):
    """Frame/baseline/window shape mismatch."""


class ResolutionError(HometwinError):
    """Operation applied to an unsupported thermal resolution."""


class InsufficientDataError(HometwinError):
    """Not enough samples to compute the requested quantity."""


class StratificationError(HometwinError):
    """A class is missing from a training split."""


class CoverageError(HometwinError):
    """Timeline does not cover the requested window."""


class AlignmentError(HometwinError):
    """Predicted and truth timelines use different minute grids."""


class WindowMismatchError(HometwinError):
    """Report components were computed for different day windows."""


class ModelFormatError(HometwinError):
    """Model parameter file is corrupt or version-mismatched."""

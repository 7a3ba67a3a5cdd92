"""Shared vocabulary: time conventions, sensor kinds, readings, thermal frames, labels.

Timestamps are integer milliseconds on a naive local clock (a configurable
wall-clock origin plus a timezone offset make clock-of-day rules such as
"nighttime" testable without real timezones).

Thermal pixels are stored as int16 centi-degrees Celsius everywhere.  That
single canonical representation is what makes the wire format round-trip
bit-exact and keeps a full day of frames affordable in memory; float views
are derived at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Iterator

import numpy as np

from .errors import DimensionError

MS_PER_SECOND = 1_000
MS_PER_MINUTE = 60_000
MS_PER_HOUR = 3_600_000
MS_PER_DAY = 86_400_000

# Nominal thermal frame period: 20 frames make one 5-second window.
FRAME_PERIOD_MS = 250
WINDOW_FRAMES = 20
WINDOW_MS = FRAME_PERIOD_MS * WINDOW_FRAMES

TEMP_MIN_C = 10.0
TEMP_MAX_C = 45.0


def parse_epoch(text: str) -> int:
    """Parse an ISO date-time as naive local milliseconds since 1970-01-01."""
    dt = datetime.fromisoformat(text)
    return int((dt - datetime(1970, 1, 1)).total_seconds() * 1000)


def parse_clock(text: str) -> int:
    """Parse "HH:MM" or "HH:MM:SS" into milliseconds past midnight."""
    parts = text.split(":")
    if len(parts) not in (2, 3) or not all(p.isdigit() for p in parts):
        raise ValueError(f"bad clock time {text!r}, expected HH:MM[:SS]")
    h, m = int(parts[0]), int(parts[1])
    s = int(parts[2]) if len(parts) == 3 else 0
    if h > 23 or m > 59 or s > 59:
        raise ValueError(f"bad clock time {text!r}")
    return (h * 3600 + m * 60 + s) * 1000


def format_clock(ms_of_day: int) -> str:
    s = ms_of_day // 1000
    return f"{s // 3600:02d}:{s % 3600 // 60:02d}"


def ms_of_day(ts: int, tz_offset_min: int = 0) -> int:
    """Clock-of-day position of a timestamp, in milliseconds past midnight."""
    return (ts + tz_offset_min * MS_PER_MINUTE) % MS_PER_DAY


def floor_minute(ts: int) -> int:
    return ts - ts % MS_PER_MINUTE


def in_clock_window(ts: int, start_ms: int, end_ms: int, tz_offset_min: int = 0) -> bool:
    """True if the timestamp's clock position lies in [start, end), wrapping midnight."""
    t = ms_of_day(ts, tz_offset_min)
    if start_ms <= end_ms:
        return start_ms <= t < end_ms
    return t >= start_ms or t < end_ms


class SensorKind(Enum):
    TEMP_HUMIDITY = "temp_humidity"
    LIGHT = "light"
    NOISE = "noise"
    MOTION = "motion"
    THERMAL4 = "thermal4"
    THERMAL32 = "thermal32"

    @property
    def is_thermal(self) -> bool:
        return self in (SensorKind.THERMAL4, SensorKind.THERMAL32)

    @property
    def resolution(self) -> int:
        if self is SensorKind.THERMAL4:
            return 4
        if self is SensorKind.THERMAL32:
            return 32
        raise ValueError(f"{self} has no thermal resolution")


class PostureLabel(Enum):
    SIT = 0
    STAND = 1
    WALK = 2
    LIE_DOWN = 3
    NOT_HERE = 4


class ActivityLabel(Enum):
    SLEEPING = 0
    KITCHEN_ACTIVITY = 1
    DINING_ROOM_ACTIVITY = 2
    NOT_AT_HOME = 3
    RESTROOM = 4
    LIVING_ROOM_ACTIVITY = 5
    VISITORS = 6


# Minute slots the classifier could not attribute to any of the seven
# activities.  Kept outside the ActivityLabel enum on purpose: the label set
# is closed, and reports must distinguish "unknown" from any real activity.
UNKNOWN_ACTIVITY = 7

ACTIVITY_NAMES = [label.name for label in ActivityLabel] + ["UNKNOWN"]


def quantize(value: float) -> float:
    """Snap a scalar reading onto the 0.01 wire grid (round half to even)."""
    return float(np.round(value * 100.0) / 100.0)


def quantize_pixels(celsius: np.ndarray) -> np.ndarray:
    """Convert float degrees Celsius to the canonical int16 centi-degree grid."""
    return np.clip(np.rint(np.asarray(celsius) * 100.0), -32768, 32767).astype(np.int16)


def pixels_to_celsius(centi: np.ndarray) -> np.ndarray:
    return centi.astype(np.float32) / 100.0


@dataclass(frozen=True, slots=True)
class SensorReading:
    """One timestamped scalar sample.

    value semantics by kind: degrees C or %RH for temp/humidity channels,
    arbitrary-but-consistent units for light and noise, {0.0, 1.0} for motion
    (1 = something moved inside the sensing area).  Values are quantized to
    0.01 so the wire format round-trips exactly.
    """

    sensor_id: str
    timestamp: int
    kind: SensorKind
    value: float

    def __post_init__(self):
        if self.kind.is_thermal:
            raise ValueError("thermal samples are ThermalFrame, not SensorReading")
        if self.kind is SensorKind.MOTION and self.value not in (0.0, 1.0):
            raise ValueError(f"motion value must be 0 or 1, got {self.value}")


@dataclass(frozen=True, slots=True)
class ThermalFrame:
    """One heat-map frame; pixels are a row-major res x res int16 centi-degree grid."""

    sensor_id: str
    timestamp: int
    resolution: int
    pixels_centi: np.ndarray

    def __post_init__(self):
        if self.pixels_centi.shape != (self.resolution, self.resolution):
            raise DimensionError(
                f"expected {self.resolution}x{self.resolution} pixels, "
                f"got {self.pixels_centi.shape}"
            )

    @classmethod
    def from_celsius(cls, sensor_id: str, timestamp: int, celsius: np.ndarray) -> "ThermalFrame":
        centi = quantize_pixels(celsius)
        return cls(sensor_id, timestamp, centi.shape[0], centi)

    def celsius(self) -> np.ndarray:
        return pixels_to_celsius(self.pixels_centi)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThermalFrame):
            return NotImplemented
        return (
            self.sensor_id == other.sensor_id
            and self.timestamp == other.timestamp
            and self.resolution == other.resolution
            and np.array_equal(self.pixels_centi, other.pixels_centi)
        )


@dataclass
class FrameBlock:
    """A contiguous run of frames from one sensor, stored as bulk arrays.

    This is the canonical in-memory and on-wire form; per-frame ThermalFrame
    objects are materialized only where a single frame is handled.
    """

    sensor_id: str
    resolution: int
    timestamps: np.ndarray  # int64[n], strictly increasing
    pixels_centi: np.ndarray  # int16[n, res, res]

    def __post_init__(self):
        n = len(self.timestamps)
        if self.pixels_centi.shape != (n, self.resolution, self.resolution):
            raise DimensionError(
                f"pixel array {self.pixels_centi.shape} does not match "
                f"{n} frames at resolution {self.resolution}"
            )

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameBlock):
            return NotImplemented
        return (
            self.sensor_id == other.sensor_id
            and self.resolution == other.resolution
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.pixels_centi, other.pixels_centi)
        )

    def frame(self, i: int) -> ThermalFrame:
        return ThermalFrame(
            self.sensor_id, int(self.timestamps[i]), self.resolution, self.pixels_centi[i]
        )

    def iter_frames(self) -> Iterator[ThermalFrame]:
        for i in range(len(self)):
            yield self.frame(i)

    def slice(self, t0: int, t1: int) -> "FrameBlock":
        lo = int(np.searchsorted(self.timestamps, t0, side="left"))
        hi = int(np.searchsorted(self.timestamps, t1, side="left"))
        return FrameBlock(
            self.sensor_id, self.resolution, self.timestamps[lo:hi], self.pixels_centi[lo:hi]
        )

    @staticmethod
    def concat(blocks: list["FrameBlock"]) -> "FrameBlock":
        if not blocks:
            raise ValueError("cannot concatenate zero blocks")
        first = blocks[0]
        return FrameBlock(
            first.sensor_id,
            first.resolution,
            np.concatenate([b.timestamps for b in blocks]),
            np.concatenate([b.pixels_centi for b in blocks]),
        )


@dataclass
class ReadingSeries:
    """Bulk form of one scalar sensor's time-ordered readings."""

    sensor_id: str
    kind: SensorKind
    timestamps: np.ndarray  # int64[n]
    values: np.ndarray  # float64[n], quantized to 0.01

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReadingSeries):
            return NotImplemented
        return (
            self.sensor_id == other.sensor_id
            and self.kind == other.kind
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.values, other.values)
        )

    def iter_readings(self) -> Iterator[SensorReading]:
        for i in range(len(self)):
            yield SensorReading(self.sensor_id, int(self.timestamps[i]), self.kind, float(self.values[i]))

    def slice(self, t0: int, t1: int) -> "ReadingSeries":
        lo = int(np.searchsorted(self.timestamps, t0, side="left"))
        hi = int(np.searchsorted(self.timestamps, t1, side="left"))
        return ReadingSeries(self.sensor_id, self.kind, self.timestamps[lo:hi], self.values[lo:hi])

    @staticmethod
    def from_readings(readings: list[SensorReading]) -> "ReadingSeries":
        if not readings:
            raise ValueError("cannot build a series from zero readings")
        return ReadingSeries(
            readings[0].sensor_id,
            readings[0].kind,
            np.array([r.timestamp for r in readings], dtype=np.int64),
            np.array([r.value for r in readings], dtype=np.float64),
        )

"""Thermal preprocessing: per-pixel baseline, noise filtering, self-calibration,
motion index, and blob counting.

The baseline is a per-pixel exponentially weighted mean/variance fed only by
frames judged unoccupied, so persistent environmental heat (sunlight patches,
slow ambient drift) is absorbed while people are not.  Self-calibration is a
hard reset of the baseline from recent unoccupied frames, triggered when the
co-located temperature sensor reports a significant ambient shift.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import MS_PER_MINUTE, pixels_to_celsius
from .errors import DimensionError, InsufficientDataError, ResolutionError


@dataclass
class PixelBaseline:
    resolution: int
    mean: np.ndarray  # float64[res, res], degrees C
    var: np.ndarray  # float64[res, res]
    last_calibration: int
    reference_ambient: float
    frames_seen: int = 0

    @classmethod
    def from_frames(
        cls, celsius: np.ndarray, ambient: float, now: int
    ) -> "PixelBaseline":
        """Initialize from a stack of unoccupied frames (float C, [n, r, r])."""
        res = celsius.shape[-1]
        return cls(
            resolution=res,
            mean=celsius.mean(axis=0, dtype=np.float64),
            var=celsius.var(axis=0, dtype=np.float64),
            last_calibration=now,
            reference_ambient=float(ambient),
            frames_seen=celsius.shape[0],
        )

    def update(self, celsius: np.ndarray, alpha: float) -> None:
        """Exponentially weighted update from one unoccupied frame."""
        delta = celsius - self.mean
        self.mean += alpha * delta
        self.var = (1.0 - alpha) * (self.var + alpha * delta * delta)
        self.frames_seen += 1

    # -- persistence (store snapshot conventions: little-endian, versioned)

    def to_bytes(self) -> bytes:
        head = struct.pack(
            "<8sBBqdq",
            b"HTBASE1\x00",
            1,
            self.resolution,
            self.last_calibration,
            self.reference_ambient,
            self.frames_seen,
        )
        return head + self.mean.astype("<f8").tobytes() + self.var.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PixelBaseline":
        magic, version, res, last_cal, ref, seen = struct.unpack_from("<8sBBqdq", data)
        if magic != b"HTBASE1\x00" or version != 1:
            raise ValueError("bad baseline blob")
        offset = struct.calcsize("<8sBBqdq")
        n = res * res
        mean = np.frombuffer(data, dtype="<f8", count=n, offset=offset).reshape(res, res)
        var = np.frombuffer(data, dtype="<f8", count=n, offset=offset + 8 * n).reshape(res, res)
        return cls(res, mean.copy(), var.copy(), last_cal, ref, seen)


def filter_frame(celsius: np.ndarray, baseline: PixelBaseline) -> np.ndarray:
    """Residual = frame minus baseline mean, clamped at zero.

    Accepts a single frame [r, r] or a stack [n, r, r]; float degrees C in,
    float32 residual out.
    """
    celsius = np.asarray(celsius)
    if celsius.shape[-2:] != (baseline.resolution, baseline.resolution):
        raise DimensionError(
            f"frame shape {celsius.shape[-2:]} does not match baseline "
            f"resolution {baseline.resolution}"
        )
    residual = celsius - baseline.mean
    np.maximum(residual, 0.0, out=residual)
    return residual.astype(np.float32)


def should_calibrate(
    baseline: PixelBaseline,
    ambient_now: float,
    occupied: bool,
    now: int,
    delta_cal_c: float = 1.5,
    min_recal_interval_min: float = 30.0,
) -> bool:
    """Fire a self-calibration only on a significant ambient shift, with the
    room unoccupied and the rate limit elapsed."""
    if occupied:
        return False
    if abs(ambient_now - baseline.reference_ambient) <= delta_cal_c:
        return False
    return now - baseline.last_calibration >= min_recal_interval_min * MS_PER_MINUTE


def apply_calibration(
    baseline: PixelBaseline,
    recent_celsius: np.ndarray,
    ambient_now: float,
    now: int,
    warmup_frames: int = 120,
) -> bool:
    """Reset the baseline from recent unoccupied frames.

    Returns False (deferred) when fewer than `warmup_frames` frames are
    available; that is a signal, not a failure.
    """
    recent_celsius = np.asarray(recent_celsius)
    if recent_celsius.ndim != 3 or recent_celsius.shape[0] < warmup_frames:
        return False
    if recent_celsius.shape[-2:] != (baseline.resolution, baseline.resolution):
        raise DimensionError("calibration frames do not match baseline resolution")
    baseline.mean = recent_celsius.mean(axis=0, dtype=np.float64)
    baseline.var = recent_celsius.var(axis=0, dtype=np.float64)
    baseline.reference_ambient = float(ambient_now)
    baseline.last_calibration = now
    return True


def motion_index(frames: np.ndarray) -> float:
    """Mean over consecutive frame pairs of the mean absolute per-pixel change.

    Already per-pixel, so 4x4 and 32x32 values are directly comparable.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3 or frames.shape[0] < 2:
        raise InsufficientDataError("motion index needs at least 2 frames")
    diffs = np.abs(np.diff(frames, axis=0))
    return float(diffs.mean())


def motion_index_series(frames: np.ndarray) -> np.ndarray:
    """Per-pair mean absolute difference; motion_index is the mean of these."""
    frames = np.asarray(frames, dtype=np.float64)
    return np.abs(np.diff(frames, axis=0)).mean(axis=(1, 2))


def count_blobs(
    residual: np.ndarray, threshold: float = 2.0, min_pixels: int = 3
) -> int:
    """Number of 4-connected components with >= min_pixels above threshold.

    Only meaningful at 32x32 (the high-resolution module); lower resolutions
    raise ResolutionError.
    """
    residual = np.asarray(residual)
    if residual.shape != (32, 32):
        raise ResolutionError(
            f"blob counting requires a 32x32 residual, got {residual.shape}"
        )
    hot = residual > threshold
    labels = np.zeros(hot.shape, dtype=np.int32)
    current = 0
    count = 0
    for i in range(32):
        for j in range(32):
            if not hot[i, j] or labels[i, j]:
                continue
            current += 1
            size = 0
            stack = [(i, j)]
            labels[i, j] = current
            while stack:
                y, x = stack.pop()
                size += 1
                for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < 32 and 0 <= nx < 32 and hot[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = current
                        stack.append((ny, nx))
            if size >= min_pixels:
                count += 1
    return count


@dataclass
class TrackerParams:
    warmup_frames: int = 120
    baseline_alpha: float = 0.01
    theta_idle: float = 0.6
    presence_max_c: float = 1.5
    delta_cal_c: float = 1.5
    min_recal_interval_min: float = 30.0


class BaselineTracker:
    """Streaming baseline maintenance for one thermal sensor.

    Feed frame stacks in time order; residual stacks come back.  The first
    `warmup_frames` frames initialize the baseline and are assumed
    unoccupied.  After warmup the baseline absorbs a frame only when the
    trailing-minute motion index stays below theta_idle AND the frame's
    residual stays below presence_max_c -- a still sleeper keeps heat in the
    frame but must never be absorbed into the background.

    Frames are processed in ~10 s sub-chunks with one gate decision and one
    weighted baseline update per chunk (weight 1-(1-alpha)^k for k absorbed
    frames), which keeps day-long streams cheap without changing the
    steady-state behaviour of the per-frame update.
    """

    CHUNK = 40  # frames per update decision (10 s at 4 Hz)
    AMBIENT_SMOOTH_SAMPLES = 12  # one minute of 5 s thermometer readings

    def __init__(self, resolution: int, params: TrackerParams | None = None):
        self.resolution = resolution
        self.params = params or TrackerParams()
        self.baseline: PixelBaseline | None = None
        self._warmup: list[np.ndarray] = []
        self._warmup_ts: list[int] = []
        # trailing-minute chunk diffs: (ts, mean abs consecutive-frame diff)
        self._recent_diff: deque[tuple[int, float]] = deque()
        self._prev_frame: np.ndarray | None = None
        # ring of recent unoccupied frames for calibration resets
        self._calib_ring: deque[np.ndarray] = deque(maxlen=240)
        self._ambient: float | None = None
        self._ambient_ts: np.ndarray | None = None
        self._ambient_values: np.ndarray | None = None
        # ambient the baseline mean currently corresponds to; the gap between
        # it and the live thermometer is subtracted from every frame, so slow
        # drift cannot fake (or erase) a warm body while updates are blocked
        self._ambient_at_mean: float | None = None
        self.calibration_events: list[int] = []

    def observe_ambient(self, value: float) -> None:
        self._ambient = float(value)
        if self._ambient_at_mean is None:
            self._ambient_at_mean = float(value)

    def set_ambient_series(self, timestamps: np.ndarray, values: np.ndarray) -> None:
        """Co-located temperature readings for continuous drift compensation."""
        self._ambient_ts = np.asarray(timestamps, dtype=np.int64)
        self._ambient_values = np.asarray(values, dtype=np.float64)

    def _ambient_at(self, ts: int) -> float | None:
        """Recent-window mean of the thermometer; the ambient signal is slow
        and the reading noise would otherwise leak into every residual."""
        if self._ambient_ts is not None and len(self._ambient_ts):
            i = int(np.searchsorted(self._ambient_ts, ts, side="right"))
            if i > 0:
                lo = max(0, i - self.AMBIENT_SMOOTH_SAMPLES)
                return float(self._ambient_values[lo:i].mean())
        return self._ambient

    def _trailing_index(self, now: int) -> float:
        while self._recent_diff and self._recent_diff[0][0] < now - MS_PER_MINUTE:
            self._recent_diff.popleft()
        if not self._recent_diff:
            return 0.0
        return float(np.mean([d for _, d in self._recent_diff]))

    def _chunk_diff(self, celsius: np.ndarray) -> float:
        """Mean abs consecutive-frame difference across the chunk, including
        the seam against the previous chunk's last frame."""
        stack = celsius
        if self._prev_frame is not None:
            stack = np.concatenate([self._prev_frame[None], celsius])
        self._prev_frame = celsius[-1]
        if stack.shape[0] < 2:
            return 0.0
        return float(np.abs(np.diff(stack, axis=0)).mean())

    def process(self, timestamps: np.ndarray, pixels_centi: np.ndarray) -> np.ndarray:
        """Consume a stack of frames; return float32 residuals [n, r, r].

        Warmup frames produce all-zero residuals (the baseline is still
        forming).
        """
        n = pixels_centi.shape[0]
        residuals = np.zeros((n, self.resolution, self.resolution), dtype=np.float32)
        p = self.params

        start = 0
        if self.baseline is None:
            take = min(p.warmup_frames - len(self._warmup), n)
            if take:
                warm = pixels_to_celsius(pixels_centi[:take]).astype(np.float64)
                self._warmup.extend(warm)
                self._warmup_ts.extend(int(t) for t in timestamps[:take])
            start = take
            if len(self._warmup) >= p.warmup_frames:
                ambient = self._ambient_at(self._warmup_ts[-1])
                if ambient is None:
                    ambient = float(np.median(self._warmup[-1]))
                stack = np.stack(self._warmup)
                self.baseline = PixelBaseline.from_frames(
                    stack, ambient, self._warmup_ts[-1]
                )
                self._ambient_at_mean = ambient
                self._calib_ring.extend(stack)
                self._prev_frame = stack[-1]
                self._warmup.clear()
                self._warmup_ts.clear()
            if start == n:
                return residuals

        base = self.baseline
        for lo in range(start, n, self.CHUNK):
            hi = min(lo + self.CHUNK, n)
            celsius = pixels_to_celsius(pixels_centi[lo:hi]).astype(np.float64)
            ts_end = int(timestamps[hi - 1])
            ambient_now = self._ambient_at(ts_end)
            if ambient_now is not None:
                self._ambient = ambient_now

            offset = 0.0
            if ambient_now is not None and self._ambient_at_mean is not None:
                offset = ambient_now - self._ambient_at_mean
            residual = celsius - (base.mean + offset)
            np.maximum(residual, 0.0, out=residual)
            residuals[lo:hi] = residual

            self._recent_diff.append((ts_end, self._chunk_diff(celsius)))
            moving = self._trailing_index(ts_end) >= p.theta_idle
            present = float(residual.max()) >= p.presence_max_c
            if moving or present:
                continue

            k = hi - lo
            weight = 1.0 - (1.0 - p.baseline_alpha) ** k
            chunk_mean = celsius.mean(axis=0)
            delta = chunk_mean - base.mean
            base.mean = base.mean + weight * delta
            base.var = (1.0 - weight) * (base.var + weight * delta * delta)
            base.frames_seen += k
            if ambient_now is not None and self._ambient_at_mean is not None:
                self._ambient_at_mean += weight * (ambient_now - self._ambient_at_mean)
            self._calib_ring.extend(celsius)

            if self._ambient is not None and should_calibrate(
                base,
                self._ambient,
                False,
                ts_end,
                p.delta_cal_c,
                p.min_recal_interval_min,
            ):
                ring = np.stack(self._calib_ring)
                if apply_calibration(base, ring, self._ambient, ts_end, p.warmup_frames):
                    self.calibration_events.append(ts_end)
                    self._ambient_at_mean = self._ambient
        return residuals

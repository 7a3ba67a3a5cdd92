"""Hub packets and the per-minute batching redirector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import MS_PER_MINUTE, FrameBlock, SensorReading, floor_minute
from ..errors import StalenessError


@dataclass
class HubPacket:
    """One minute of buffered sensor data from one hub.

    Contents are kept in canonical order (readings by sensor id then
    timestamp, frame blocks by sensor id) so that decode(encode(p)) == p.
    """

    hub_id: str
    sequence_number: int
    window_start: int
    window_end: int
    readings: list[SensorReading] = field(default_factory=list)
    frames: list[FrameBlock] = field(default_factory=list)

    def __post_init__(self):
        if self.window_end - self.window_start != MS_PER_MINUTE:
            raise ValueError(
                f"packet window must span exactly one minute, got "
                f"[{self.window_start}, {self.window_end})"
            )
        self.readings = sorted(self.readings, key=lambda r: (r.sensor_id, r.timestamp))
        self.frames = sorted(self.frames, key=lambda b: b.sensor_id)
        for r in self.readings:
            if not (self.window_start <= r.timestamp < self.window_end):
                raise ValueError(
                    f"reading at {r.timestamp} outside window "
                    f"[{self.window_start}, {self.window_end})"
                )
        for b in self.frames:
            if len(b) and not (
                self.window_start <= b.timestamps[0] and b.timestamps[-1] < self.window_end
            ):
                raise ValueError(
                    f"frames for {b.sensor_id} outside window "
                    f"[{self.window_start}, {self.window_end})"
                )

    @property
    def item_count(self) -> int:
        return len(self.readings) + sum(len(b) for b in self.frames)


class Redirector:
    """Buffers readings and frames, emitting one packet per closed minute.

    A packet is produced for every minute even when nothing arrived
    (heartbeat semantics); sequence numbers increase by exactly one per
    packet.  Items stamped before the current open window are stale.
    """

    def __init__(self, hub_id: str, window_start: int):
        if window_start % MS_PER_MINUTE:
            raise ValueError("window_start must be minute-aligned")
        self.hub_id = hub_id
        self.window_start = window_start
        self.sequence_number = 0
        self._readings: list[SensorReading] = []
        self._frames: list[FrameBlock] = []

    def add_reading(self, reading: SensorReading) -> None:
        if reading.timestamp < self.window_start:
            raise StalenessError(
                f"reading at {reading.timestamp} predates open window "
                f"starting {self.window_start}"
            )
        self._readings.append(reading)

    def add_frames(self, block: FrameBlock) -> None:
        if len(block) and block.timestamps[0] < self.window_start:
            raise StalenessError(
                f"frame at {int(block.timestamps[0])} predates open window "
                f"starting {self.window_start}"
            )
        self._frames.append(block)

    def flush(self, boundary: int) -> list[HubPacket]:
        """Close out every whole minute before `boundary` (minute-aligned)."""
        if boundary % MS_PER_MINUTE:
            raise ValueError("flush boundary must be minute-aligned")
        if boundary <= self.window_start:
            return []
        buckets: dict[int, list[SensorReading]] = {}
        remainder: list[SensorReading] = []
        for r in self._readings:
            if r.timestamp >= boundary:
                remainder.append(r)
            else:
                buckets.setdefault(r.timestamp // MS_PER_MINUTE, []).append(r)
        packets = []
        for start in range(self.window_start, boundary, MS_PER_MINUTE):
            end = start + MS_PER_MINUTE
            frames = [
                sliced
                for b in self._frames
                if len(sliced := b.slice(start, end))
            ]
            packets.append(
                HubPacket(
                    self.hub_id,
                    self.sequence_number,
                    start,
                    end,
                    buckets.get(start // MS_PER_MINUTE, []),
                    frames,
                )
            )
            self.sequence_number += 1
        self._readings = remainder
        self._frames = [
            sliced
            for b in self._frames
            if len(sliced := b.slice(boundary, np.iinfo(np.int64).max))
        ]
        self.window_start = boundary
        return packets

    def flush_all(self, last_ts: int) -> list[HubPacket]:
        """Flush through the minute containing `last_ts`."""
        return self.flush(floor_minute(last_ts) + MS_PER_MINUTE)

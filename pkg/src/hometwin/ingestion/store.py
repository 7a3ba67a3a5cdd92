"""Append-only record store with time-range queries and dedup by packet id.

One writer, many readers: appends are serialized by the caller; queries
consolidate lazily and always see every fully appended packet.  Missing
sequence numbers are tracked as gaps, not errors.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from ..core import FrameBlock, ReadingSeries, SensorKind
from ..errors import RangeError, VersionError, WireFormatError
from .packets import HubPacket

_MAGIC = b"HTSTORE1"
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")


class RecordStore:
    def __init__(self):
        self._seen: dict[str, set[int]] = {}
        # sensor_id -> (kind, [ts chunks], [value chunks]) for scalar readings
        self._readings: dict[str, tuple[SensorKind, list[np.ndarray], list[np.ndarray]]] = {}
        # sensor_id -> (resolution, [ts chunks], [pixel chunks])
        self._frames: dict[str, tuple[int, list[np.ndarray], list[np.ndarray]]] = {}
        self._dirty: set[str] = set()

    # -- writes ----------------------------------------------------------

    def append(self, packet: HubPacket) -> int:
        """Materialize a packet; duplicates (same hub id + sequence) add 0."""
        seqs = self._seen.setdefault(packet.hub_id, set())
        if packet.sequence_number in seqs:
            return 0
        seqs.add(packet.sequence_number)

        count = 0
        i = 0
        readings = packet.readings
        while i < len(readings):
            j = i
            sid = readings[i].sensor_id
            while j < len(readings) and readings[j].sensor_id == sid:
                j += 1
            kind, ts_chunks, val_chunks = self._readings.setdefault(
                sid, (readings[i].kind, [], [])
            )
            ts_chunks.append(np.array([r.timestamp for r in readings[i:j]], dtype=np.int64))
            val_chunks.append(np.array([r.value for r in readings[i:j]], dtype=np.float64))
            self._dirty.add(sid)
            count += j - i
            i = j

        for block in packet.frames:
            if not len(block):
                continue
            res, ts_chunks, px_chunks = self._frames.setdefault(
                block.sensor_id, (block.resolution, [], [])
            )
            ts_chunks.append(np.asarray(block.timestamps, dtype=np.int64))
            px_chunks.append(np.asarray(block.pixels_centi, dtype=np.int16))
            self._dirty.add(block.sensor_id)
            count += len(block)
        return count

    # -- reads -----------------------------------------------------------

    def _consolidate(self, sensor_id: str) -> None:
        if sensor_id not in self._dirty:
            return
        if sensor_id in self._readings:
            kind, ts_chunks, val_chunks = self._readings[sensor_id]
            ts = np.concatenate(ts_chunks)
            vals = np.concatenate(val_chunks)
            order = np.argsort(ts, kind="stable")
            self._readings[sensor_id] = (kind, [ts[order]], [vals[order]])
        if sensor_id in self._frames:
            res, ts_chunks, px_chunks = self._frames[sensor_id]
            ts = np.concatenate(ts_chunks)
            px = np.concatenate(px_chunks)
            order = np.argsort(ts, kind="stable")
            self._frames[sensor_id] = (res, [ts[order]], [px[order]])
        self._dirty.discard(sensor_id)

    @staticmethod
    def _check_range(t0: int, t1: int) -> None:
        if t0 > t1:
            raise RangeError(f"query range has t0 {t0} > t1 {t1}")

    def query_readings(self, sensor_id: str, t0: int, t1: int) -> ReadingSeries:
        """Readings with t0 <= t < t1, sorted by timestamp."""
        self._check_range(t0, t1)
        if sensor_id not in self._readings:
            return ReadingSeries(
                sensor_id,
                SensorKind.MOTION,
                np.empty(0, dtype=np.int64),
                np.empty(0, dtype=np.float64),
            )
        self._consolidate(sensor_id)
        kind, (ts,), (vals,) = self._readings[sensor_id]
        lo = int(np.searchsorted(ts, t0, side="left"))
        hi = int(np.searchsorted(ts, t1, side="left"))
        return ReadingSeries(sensor_id, kind, ts[lo:hi], vals[lo:hi])

    def query_frames(self, sensor_id: str, t0: int, t1: int) -> FrameBlock:
        """Frames with t0 <= t < t1, sorted by timestamp."""
        self._check_range(t0, t1)
        if sensor_id not in self._frames:
            return FrameBlock(
                sensor_id, 4, np.empty(0, dtype=np.int64), np.empty((0, 4, 4), dtype=np.int16)
            )
        self._consolidate(sensor_id)
        res, (ts,), (px,) = self._frames[sensor_id]
        lo = int(np.searchsorted(ts, t0, side="left"))
        hi = int(np.searchsorted(ts, t1, side="left"))
        return FrameBlock(sensor_id, res, ts[lo:hi], px[lo:hi])

    def query(self, sensor_id: str, t0: int, t1: int) -> ReadingSeries | FrameBlock:
        if sensor_id in self._frames:
            return self.query_frames(sensor_id, t0, t1)
        return self.query_readings(sensor_id, t0, t1)

    def sensor_ids(self) -> list[str]:
        return sorted(set(self._readings) | set(self._frames))

    def record_count(self) -> int:
        total = 0
        for sid in set(self._readings) | set(self._frames):
            self._consolidate(sid)
        for _, ts_chunks, _ in self._readings.values():
            total += sum(len(c) for c in ts_chunks)
        for _, ts_chunks, _ in self._frames.values():
            total += sum(len(c) for c in ts_chunks)
        return total

    def gaps(self) -> list[tuple[str, int, int]]:
        """Missing sequence ranges per hub as (hub_id, first_missing, last_missing)."""
        out = []
        for hub_id in sorted(self._seen):
            seqs = sorted(self._seen[hub_id])
            for prev, cur in zip(seqs, seqs[1:]):
                if cur > prev + 1:
                    out.append((hub_id, prev + 1, cur - 1))
        return out

    # -- snapshot persistence ---------------------------------------------

    def save(self, path: str | Path) -> None:
        body = bytearray()
        body += _U32.pack(len(self._seen))
        for hub_id in sorted(self._seen):
            raw = hub_id.encode("utf-8")
            body += _U16.pack(len(raw))
            body += raw
            seqs = sorted(self._seen[hub_id])
            body += _U32.pack(len(seqs))
            body += np.array(seqs, dtype="<u8").tobytes()

        reading_ids = sorted(self._readings)
        body += _U32.pack(len(reading_ids))
        for sid in reading_ids:
            self._consolidate(sid)
            kind, (ts,), (vals,) = self._readings[sid]
            raw = sid.encode("utf-8")
            body += _U16.pack(len(raw))
            body += raw
            body += struct.pack("<BI", list(SensorKind).index(kind), len(ts))
            body += ts.astype("<i8").tobytes()
            body += np.round(vals * 100.0).astype("<i4").tobytes()

        frame_ids = sorted(self._frames)
        body += _U32.pack(len(frame_ids))
        for sid in frame_ids:
            self._consolidate(sid)
            res, (ts,), (px,) = self._frames[sid]
            raw = sid.encode("utf-8")
            body += _U16.pack(len(raw))
            body += raw
            body += struct.pack("<BI", res, len(ts))
            body += ts.astype("<i8").tobytes()
            body += px.astype("<i2").tobytes()

        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(bytes([1]))
            fh.write(_U32.pack(zlib.crc32(bytes(body))))
            fh.write(body)

    @classmethod
    def load(cls, path: str | Path) -> "RecordStore":
        data = Path(path).read_bytes()
        if data[: len(_MAGIC)] != _MAGIC:
            raise WireFormatError("bad store snapshot magic", 0)
        if data[len(_MAGIC)] != 1:
            raise VersionError(f"unsupported store snapshot version {data[len(_MAGIC)]}")
        (crc,) = _U32.unpack_from(data, len(_MAGIC) + 1)
        body = data[len(_MAGIC) + 5 :]
        if zlib.crc32(body) != crc:
            raise WireFormatError("store snapshot crc mismatch", len(_MAGIC) + 1)

        store = cls()
        pos = 0

        def take(n: int) -> bytes:
            nonlocal pos
            if pos + n > len(body):
                raise WireFormatError("truncated store snapshot", len(_MAGIC) + 5 + pos)
            out = body[pos : pos + n]
            pos += n
            return out

        def take_str() -> str:
            (n,) = _U16.unpack(take(2))
            return take(n).decode("utf-8")

        (n_hubs,) = _U32.unpack(take(4))
        for _ in range(n_hubs):
            hub_id = take_str()
            (n_seqs,) = _U32.unpack(take(4))
            seqs = np.frombuffer(take(8 * n_seqs), dtype="<u8")
            store._seen[hub_id] = set(int(s) for s in seqs)

        (n_series,) = _U32.unpack(take(4))
        for _ in range(n_series):
            sid = take_str()
            kind_idx, n = struct.unpack("<BI", take(5))
            ts = np.frombuffer(take(8 * n), dtype="<i8").astype(np.int64)
            vals = np.frombuffer(take(4 * n), dtype="<i4").astype(np.float64) / 100.0
            store._readings[sid] = (list(SensorKind)[kind_idx], [ts], [vals])

        (n_series,) = _U32.unpack(take(4))
        for _ in range(n_series):
            sid = take_str()
            res, n = struct.unpack("<BI", take(5))
            ts = np.frombuffer(take(8 * n), dtype="<i8").astype(np.int64)
            px = np.frombuffer(take(2 * n * res * res), dtype="<i2").astype(np.int16)
            store._frames[sid] = (res, [ts], [px.reshape(n, res, res)])

        return store

"""Binary wire format for hub packets (version 0x01).

Layout, all little-endian::

    u8  version (0x01)
    u32 body length in bytes
    body:
        u16 hub id length, utf-8 hub id
        u64 sequence number
        i64 window start (ms), i64 window end (ms)
        u16 reading group count, then per group:
            u16 sensor id length, utf-8 sensor id
            u8  sensor kind code
            u32 sample count n
            n x i64 timestamps
            n x u8 values        (motion)  -- or --  n x i32 centi-units
        u16 frame group count, then per group:
            u16 sensor id length, utf-8 sensor id
            u8  resolution (4 or 32)
            u32 frame count n
            n x i64 timestamps
            n * resolution^2 x i16 centi-degrees C
    u32 crc32 of body

Temperatures ride as int16 centi-degrees and scalar values as int32
centi-units, so decoding reproduces the original values exactly.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..core import FrameBlock, SensorKind, SensorReading
from ..errors import VersionError, WireFormatError
from .packets import HubPacket

WIRE_VERSION = 0x01

_KIND_CODES = {
    SensorKind.TEMP_HUMIDITY: 0,
    SensorKind.LIGHT: 1,
    SensorKind.NOISE: 2,
    SensorKind.MOTION: 3,
    SensorKind.THERMAL4: 4,
    SensorKind.THERMAL32: 5,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

_HEAD = struct.Struct("<BI")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_PACKET_META = struct.Struct("<Qqq")
_GROUP_META = struct.Struct("<BI")


def _put_str(buf: bytearray, text: str) -> None:
    raw = text.encode("utf-8")
    buf += _U16.pack(len(raw))
    buf += raw


def encode_packet(packet: HubPacket) -> bytes:
    body = bytearray()
    _put_str(body, packet.hub_id)
    body += _PACKET_META.pack(
        packet.sequence_number, packet.window_start, packet.window_end
    )

    # readings, grouped per sensor (packet keeps them sorted by sensor, time)
    groups: list[tuple[str, SensorKind, list[SensorReading]]] = []
    for r in packet.readings:
        if groups and groups[-1][0] == r.sensor_id:
            groups[-1][2].append(r)
        else:
            groups.append((r.sensor_id, r.kind, [r]))
    body += _U16.pack(len(groups))
    for sensor_id, kind, items in groups:
        _put_str(body, sensor_id)
        body += _GROUP_META.pack(_KIND_CODES[kind], len(items))
        body += np.array([r.timestamp for r in items], dtype="<i8").tobytes()
        if kind is SensorKind.MOTION:
            body += np.array([int(r.value) for r in items], dtype=np.uint8).tobytes()
        else:
            body += np.array(
                [round(r.value * 100.0) for r in items], dtype="<i4"
            ).tobytes()

    body += _U16.pack(len(packet.frames))
    for block in packet.frames:
        _put_str(body, block.sensor_id)
        body += _GROUP_META.pack(block.resolution, len(block))
        body += block.timestamps.astype("<i8").tobytes()
        body += block.pixels_centi.astype("<i2").tobytes()

    return _HEAD.pack(WIRE_VERSION, len(body)) + bytes(body) + _U32.pack(
        zlib.crc32(body)
    )


class _Cursor:
    """Sequential reader that reports the absolute offset of any failure."""

    def __init__(self, data: bytes, base: int = 0):
        self.data = data
        self.pos = 0
        self.base = base

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WireFormatError(
                f"truncated packet: wanted {n} bytes, have {len(self.data) - self.pos}",
                self.base + self.pos,
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return _U16.unpack(self.take(2))[0]

    def string(self) -> str:
        n = self.u16()
        raw = self.take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireFormatError(f"bad utf-8 string: {exc}", self.base + self.pos - n)

    def array(self, dtype: str, count: int) -> np.ndarray:
        item = np.dtype(dtype).itemsize
        raw = self.take(item * count)
        return np.frombuffer(raw, dtype=dtype, count=count).copy()


def _decode_body(body: bytes, base: int) -> HubPacket:
    cur = _Cursor(body, base)
    hub_id = cur.string()
    seq, w0, w1 = _PACKET_META.unpack(cur.take(_PACKET_META.size))

    readings: list[SensorReading] = []
    for _ in range(cur.u16()):
        sensor_id = cur.string()
        kind_code, n = _GROUP_META.unpack(cur.take(_GROUP_META.size))
        if kind_code not in _CODE_KINDS:
            raise WireFormatError(
                f"unknown sensor kind code {kind_code}", base + cur.pos - _GROUP_META.size
            )
        kind = _CODE_KINDS[kind_code]
        ts = cur.array("<i8", n)
        if kind is SensorKind.MOTION:
            values = cur.array("u1", n).astype(np.float64)
        else:
            values = cur.array("<i4", n).astype(np.float64) / 100.0
        readings.extend(
            SensorReading(sensor_id, int(t), kind, float(v))
            for t, v in zip(ts, values)
        )

    frames: list[FrameBlock] = []
    for _ in range(cur.u16()):
        sensor_id = cur.string()
        resolution, n = _GROUP_META.unpack(cur.take(_GROUP_META.size))
        if resolution not in (4, 32):
            raise WireFormatError(
                f"bad thermal resolution {resolution}", base + cur.pos - _GROUP_META.size
            )
        ts = cur.array("<i8", n)
        px = cur.array("<i2", n * resolution * resolution)
        frames.append(
            FrameBlock(sensor_id, resolution, ts, px.reshape(n, resolution, resolution))
        )

    if cur.pos != len(body):
        raise WireFormatError(
            f"{len(body) - cur.pos} unconsumed bytes after packet body", base + cur.pos
        )
    try:
        return HubPacket(hub_id, seq, w0, w1, readings, frames)
    except ValueError as exc:
        raise WireFormatError(f"invalid packet contents: {exc}", base)


def _decode_at(data: bytes, offset: int) -> tuple[HubPacket, int]:
    if len(data) - offset < _HEAD.size:
        raise WireFormatError("truncated packet header", offset)
    version, body_len = _HEAD.unpack_from(data, offset)
    if version != WIRE_VERSION:
        raise VersionError(
            f"unsupported wire version 0x{version:02x} at offset {offset}"
        )
    body_start = offset + _HEAD.size
    body_end = body_start + body_len
    if body_end + 4 > len(data):
        raise WireFormatError("truncated packet body", len(data))
    body = data[body_start:body_end]
    (crc,) = _U32.unpack_from(data, body_end)
    if crc != zlib.crc32(body):
        raise WireFormatError("crc mismatch", body_end)
    return _decode_body(body, body_start), body_end + 4


def decode_packet(data: bytes) -> HubPacket:
    packet, end = _decode_at(data, 0)
    if end != len(data):
        raise WireFormatError(f"{len(data) - end} trailing bytes after packet", end)
    return packet


def decode_packet_stream(data: bytes) -> list[HubPacket]:
    """Decode a concatenation of packets; the format is self-delimiting."""
    packets = []
    offset = 0
    while offset < len(data):
        packet, offset = _decode_at(data, offset)
        packets.append(packet)
    return packets

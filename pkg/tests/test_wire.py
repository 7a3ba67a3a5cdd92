import numpy as np
import pytest

from hometwin.core import FrameBlock, SensorKind, SensorReading
from hometwin.errors import VersionError, WireFormatError
from hometwin.ingestion.packets import HubPacket
from hometwin.ingestion.wire import decode_packet, decode_packet_stream, encode_packet

from conftest import random_packet


def make_packet(seq=0):
    readings = [
        SensorReading("dining/A0/light", 60_000 + 1_000 * i, SensorKind.LIGHT, 150.25 + i)
        for i in range(5)
    ] + [
        SensorReading("door/B0/motion", 60_000 + 500 + 1_000 * i, SensorKind.MOTION, float(i % 2))
        for i in range(3)
    ]
    frames = [
        FrameBlock(
            "bedroom/C0/thermal",
            4,
            np.array([60_000, 60_250, 60_500], dtype=np.int64),
            np.arange(48, dtype=np.int16).reshape(3, 4, 4) + 2700,
        )
    ]
    return HubPacket("hub0", seq, 60_000, 120_000, readings, frames)


def test_round_trip_identity():
    packet = make_packet()
    assert decode_packet(encode_packet(packet)) == packet


def test_empty_packet_round_trip_minimal():
    packet = HubPacket("h", 3, 0, 60_000)
    blob = encode_packet(packet)
    assert decode_packet(blob) == packet
    assert len(blob) < 50


def test_version_byte_checked():
    blob = bytearray(encode_packet(make_packet()))
    blob[0] = 0x02
    with pytest.raises(VersionError):
        decode_packet(bytes(blob))


def test_truncation_reports_offset():
    blob = encode_packet(make_packet())
    with pytest.raises(WireFormatError) as err:
        decode_packet(blob[: len(blob) // 2])
    assert err.value.offset >= 0


def test_garbled_crc_detected():
    blob = bytearray(encode_packet(make_packet()))
    blob[20] ^= 0xFF
    with pytest.raises(WireFormatError):
        decode_packet(bytes(blob))


def test_trailing_bytes_rejected():
    blob = encode_packet(make_packet())
    with pytest.raises(WireFormatError):
        decode_packet(blob + b"x")


def test_stream_is_self_delimiting():
    packets = [make_packet(seq) for seq in range(4)]
    blob = b"".join(encode_packet(p) for p in packets)
    assert decode_packet_stream(blob) == packets


def test_randomized_round_trip_property():
    rng = np.random.default_rng(1234)
    for i in range(500):
        packet = random_packet(rng, seq=i)
        assert decode_packet(encode_packet(packet)) == packet


def test_timestamp_outside_window_rejected():
    with pytest.raises(ValueError):
        HubPacket(
            "h",
            0,
            60_000,
            120_000,
            [SensorReading("a/A0/light", 10, SensorKind.LIGHT, 1.0)],
        )
    with pytest.raises(ValueError):
        HubPacket("h", 0, 0, 61_000)  # not one minute

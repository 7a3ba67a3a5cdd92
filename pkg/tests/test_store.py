import numpy as np
import pytest

from hometwin.core import FrameBlock, SensorKind, SensorReading
from hometwin.errors import RangeError
from hometwin.ingestion.packets import HubPacket
from hometwin.ingestion.store import RecordStore

from conftest import random_packet


def minute_packet(seq, n_frames=240, hub="hub0"):
    start = seq * 60_000
    ts = start + np.arange(n_frames, dtype=np.int64) * (60_000 // max(n_frames, 1))
    frames = [
        FrameBlock("bed/C0/thermal", 4, ts, np.full((n_frames, 4, 4), 2800, dtype=np.int16))
    ]
    readings = [
        SensorReading("bed/C0/motion", start + 1000 * i, SensorKind.MOTION, 0.0)
        for i in range(60)
    ]
    return HubPacket(hub, seq, start, start + 60_000, readings, frames)


def test_append_and_query_counts():
    store = RecordStore()
    added = store.append(minute_packet(0))
    assert added == 300  # 60 motion readings + 240 frames
    frames = store.query_frames("bed/C0/thermal", 0, 60_000)
    assert len(frames) == 240


def test_duplicate_append_adds_zero():
    store = RecordStore()
    packet = minute_packet(0)
    assert store.append(packet) > 0
    assert store.append(packet) == 0
    assert len(store.query_frames("bed/C0/thermal", 0, 60_000)) == 240


def test_query_empty_range():
    store = RecordStore()
    store.append(minute_packet(0))
    assert len(store.query_frames("bed/C0/thermal", 10, 10)) == 0
    assert len(store.query_readings("nope", 0, 100)) == 0


def test_range_error():
    store = RecordStore()
    with pytest.raises(RangeError):
        store.query_readings("x", 100, 50)


def test_order_independence_and_dedup_under_permutation():
    rng = np.random.default_rng(7)
    packets = [minute_packet(seq) for seq in range(6)]
    with_dups = packets + packets[:3]

    stores = []
    for perm_seed in range(4):
        order = np.random.default_rng(perm_seed).permutation(len(with_dups))
        store = RecordStore()
        for i in order:
            store.append(with_dups[i])
        stores.append(store)

    reference = stores[0].query_frames("bed/C0/thermal", 0, 10**9)
    for store in stores[1:]:
        assert store.query_frames("bed/C0/thermal", 0, 10**9) == reference
        assert store.query_readings("bed/C0/motion", 0, 10**9) == stores[0].query_readings(
            "bed/C0/motion", 0, 10**9
        )
    assert len(reference) == 6 * 240


def test_query_returns_sorted_half_open():
    store = RecordStore()
    for seq in (2, 0, 1):
        store.append(minute_packet(seq))
    series = store.query_readings("bed/C0/motion", 59_000, 61_000)
    assert series.timestamps.tolist() == [59_000, 60_000]
    assert np.all(np.diff(store.query_frames("bed/C0/thermal", 0, 10**9).timestamps) > 0)


def test_gap_detection():
    store = RecordStore()
    for seq in (0, 1, 4, 7):
        store.append(minute_packet(seq))
    assert store.gaps() == [("hub0", 2, 3), ("hub0", 5, 6)]


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    store = RecordStore()
    packets = [random_packet(rng, seq=i) for i in range(20)]
    for packet in packets:
        store.append(packet)
    path = tmp_path / "store.bin"
    store.save(path)
    loaded = RecordStore.load(path)
    assert loaded.sensor_ids() == store.sensor_ids()
    for sensor_id in store.sensor_ids():
        assert loaded.query(sensor_id, 0, 10**12) == store.query(sensor_id, 0, 10**12)
    assert loaded.gaps() == store.gaps()

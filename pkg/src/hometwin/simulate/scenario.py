"""Scenario scripts: a wall-clock origin plus an ordered list of resident,
visitor, and environment events, with per-room ambient profiles.

Event times in JSON are minutes from scenario start (integers) or "HH:MM"
clock strings that roll over midnight as the script progresses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import (
    MS_PER_DAY,
    MS_PER_MINUTE,
    PostureLabel,
    ms_of_day,
    parse_clock,
    parse_epoch,
)
from ..errors import ConfigError
from ..layout import HomeLayout


@dataclass(frozen=True)
class OccupyRoom:
    start: int
    end: int
    room_id: str
    posture: PostureLabel
    position: tuple[float, float] | None = None  # meters; default near the room's sensor
    path: tuple[tuple[float, float], ...] | None = None  # waypoints for Walk
    orientation_deg: float = 0.0  # lie-down major axis
    turnovers: tuple[int, ...] = ()  # timed in-place body shifts (sleep movement)


@dataclass(frozen=True)
class LeaveHome:
    at: int


@dataclass(frozen=True)
class ReturnHome:
    at: int


@dataclass(frozen=True)
class LampToggle:
    at: int
    room_id: str
    on: bool


@dataclass(frozen=True)
class NoiseBurst:
    start: int
    end: int
    room_id: str
    level: float


@dataclass(frozen=True)
class VisitorEnter:
    at: int
    count: int


@dataclass(frozen=True)
class VisitorLeave:
    at: int


Event = OccupyRoom | LeaveHome | ReturnHome | LampToggle | NoiseBurst | VisitorEnter | VisitorLeave


@dataclass(frozen=True)
class AmbientProfile:
    """Diurnal environment for one room; formulas accept scalar or array times."""

    temp_base_c: float = 28.0
    temp_amp_c: float = 1.5
    temp_peak_h: float = 15.0
    temp_ramp_c_per_h: float = 0.0  # linear drift from scenario start
    humidity_base_rh: float = 70.0
    humidity_amp_rh: float = 6.0
    light_day_peak: float = 400.0
    noise_base: float = 40.0
    noise_amp: float = 8.0

    @staticmethod
    def _hour(ts, tz_offset_min: int):
        return (np.asarray(ts) + tz_offset_min * MS_PER_MINUTE) % MS_PER_DAY / 3_600_000.0

    def temperature(self, ts, scenario_start: int, tz_offset_min: int = 0):
        hour = self._hour(ts, tz_offset_min)
        phase = 2.0 * math.pi * (hour - self.temp_peak_h) / 24.0
        ramp = self.temp_ramp_c_per_h * (np.asarray(ts) - scenario_start) / 3_600_000.0
        return self.temp_base_c + self.temp_amp_c * np.cos(phase) + ramp

    def humidity(self, ts, tz_offset_min: int = 0):
        hour = self._hour(ts, tz_offset_min)
        phase = 2.0 * math.pi * (hour - 6.0) / 24.0  # most humid near dawn
        return self.humidity_base_rh + self.humidity_amp_rh * np.cos(phase)

    def daylight(self, ts, tz_offset_min: int = 0):
        """0..1 bump between 07:00 and 19:00."""
        hour = self._hour(ts, tz_offset_min)
        bump = np.sin(math.pi * (hour - 7.0) / 12.0) ** 2
        return np.where((hour >= 7.0) & (hour <= 19.0), bump, 0.0)

    def light(self, ts, tz_offset_min: int = 0):
        return self.light_day_peak * self.daylight(ts, tz_offset_min)

    def noise(self, ts, tz_offset_min: int = 0):
        # afternoon/early-evening hump
        hour = self._hour(ts, tz_offset_min)
        hump = np.exp(-(((hour - 16.0) / 4.0) ** 2))
        return self.noise_base + self.noise_amp * hump


@dataclass(frozen=True)
class SunlightPatch:
    """A static warm rectangle on one thermal sensor's grid during a clock window."""

    room_id: str
    row0: int
    col0: int
    row1: int  # exclusive
    col1: int  # exclusive
    clock_start: int  # ms past midnight
    clock_end: int
    delta_c: float = 4.0


@dataclass
class ScenarioScript:
    epoch: int  # ms, wall-clock origin of the scenario
    duration_min: int
    events: list[Event] = field(default_factory=list)
    ambient: dict[str, AmbientProfile] = field(default_factory=dict)
    sunlight: SunlightPatch | None = None

    @property
    def start(self) -> int:
        return self.epoch

    @property
    def end(self) -> int:
        return self.epoch + self.duration_min * MS_PER_MINUTE

    def profile(self, room_id: str) -> AmbientProfile:
        return self.ambient.get(room_id, _DEFAULT_PROFILE)

    def occupy_events(self) -> list[OccupyRoom]:
        return [e for e in self.events if isinstance(e, OccupyRoom)]

    def away_intervals(self) -> list[tuple[int, int]]:
        """Away spans from strictly alternating LeaveHome/ReturnHome events."""
        intervals = []
        open_leave: int | None = None
        for e in self.events:
            if isinstance(e, LeaveHome):
                if open_leave is not None:
                    raise ConfigError("LeaveHome while already away")
                open_leave = e.at
            elif isinstance(e, ReturnHome):
                if open_leave is None:
                    raise ConfigError("ReturnHome without a preceding LeaveHome")
                intervals.append((open_leave, e.at))
                open_leave = None
        if open_leave is not None:
            intervals.append((open_leave, self.end))
        return intervals

    def visitor_intervals(self) -> list[tuple[int, int, int]]:
        """(start, end, count) spans from VisitorEnter/VisitorLeave events."""
        spans = []
        open_at: int | None = None
        count = 0
        for e in self.events:
            if isinstance(e, VisitorEnter):
                if open_at is not None:
                    raise ConfigError("VisitorEnter while visitors already present")
                open_at, count = e.at, e.count
            elif isinstance(e, VisitorLeave):
                if open_at is None:
                    raise ConfigError("VisitorLeave with no visitors present")
                spans.append((open_at, e.at, count))
                open_at = None
        if open_at is not None:
            spans.append((open_at, self.end, count))
        return spans


_DEFAULT_PROFILE = AmbientProfile()


def validate_scenario(script: ScenarioScript, layout: HomeLayout) -> None:
    """Raise ConfigError on any script invariant violation."""
    room_ids = {r.room_id for r in layout.rooms}
    occupies = script.occupy_events()
    for e in occupies:
        if e.room_id not in room_ids:
            raise ConfigError(f"scenario references unknown room {e.room_id!r}")
        if e.end <= e.start:
            raise ConfigError(f"occupy event in {e.room_id!r} has end <= start")
    for a, b in zip(occupies, occupies[1:]):
        if b.start < a.end:
            raise ConfigError(
                f"overlapping occupy events: {a.room_id!r} and {b.room_id!r}"
            )
    away = script.away_intervals()  # raises on bad alternation
    for lo, hi in away:
        for e in occupies:
            if e.start < hi and lo < e.end:
                raise ConfigError("occupy event overlaps an away interval")
    script.visitor_intervals()
    for e in script.events:
        if isinstance(e, (LampToggle, NoiseBurst)) and e.room_id not in room_ids:
            raise ConfigError(f"scenario references unknown room {e.room_id!r}")


# ---------------------------------------------------------------------------
# JSON form


class _TimeParser:
    """Minutes-from-start integers, or HH:MM clock strings with midnight rollover."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        self.cursor = epoch

    def resolve(self, value) -> int:
        if isinstance(value, (int, float)):
            ts = self.epoch + int(value * MS_PER_MINUTE)
        else:
            clock = parse_clock(str(value))
            day_base = self.cursor - ms_of_day(self.cursor)
            ts = day_base + clock
            while ts < self.cursor:
                ts += MS_PER_DAY
        self.cursor = ts
        return ts


_POSTURES = {p.name.lower(): p for p in PostureLabel}


def scenario_from_dict(data: dict) -> ScenarioScript:
    try:
        epoch = parse_epoch(data["epoch"])
        clock = _TimeParser(epoch)
        events: list[Event] = []
        for raw in data.get("events", []):
            kind = raw["kind"]
            if kind == "occupy":
                start = clock.resolve(raw["start"])
                end = clock.resolve(raw["end"])
                events.append(
                    OccupyRoom(
                        start=start,
                        end=end,
                        room_id=raw["room"],
                        posture=_POSTURES[raw["posture"].lower()],
                        position=tuple(raw["position"]) if "position" in raw else None,
                        path=tuple(tuple(p) for p in raw["path"]) if "path" in raw else None,
                        orientation_deg=float(raw.get("orientation_deg", 0.0)),
                        turnovers=tuple(
                            start + int(m * MS_PER_MINUTE) for m in raw.get("turnovers", [])
                        ),
                    )
                )
            elif kind == "leave_home":
                events.append(LeaveHome(clock.resolve(raw["at"])))
            elif kind == "return_home":
                events.append(ReturnHome(clock.resolve(raw["at"])))
            elif kind == "lamp":
                events.append(LampToggle(clock.resolve(raw["at"]), raw["room"], bool(raw["on"])))
            elif kind == "noise_burst":
                events.append(
                    NoiseBurst(
                        clock.resolve(raw["start"]),
                        clock.resolve(raw["end"]),
                        raw["room"],
                        float(raw["level"]),
                    )
                )
            elif kind == "visitor_enter":
                events.append(VisitorEnter(clock.resolve(raw["at"]), int(raw["count"])))
            elif kind == "visitor_leave":
                events.append(VisitorLeave(clock.resolve(raw["at"])))
            else:
                raise ConfigError(f"unknown scenario event kind {kind!r}")
        ambient = {
            room: AmbientProfile(**profile)
            for room, profile in data.get("ambient", {}).items()
        }
        sun = None
        if "sunlight_patch" in data:
            s = data["sunlight_patch"]
            sun = SunlightPatch(
                room_id=s["room"],
                row0=int(s["row0"]),
                col0=int(s["col0"]),
                row1=int(s["row1"]),
                col1=int(s["col1"]),
                clock_start=parse_clock(s["clock_start"]),
                clock_end=parse_clock(s["clock_end"]),
                delta_c=float(s.get("delta_c", 4.0)),
            )
        return ScenarioScript(
            epoch=epoch,
            duration_min=int(data["duration_min"]),
            events=events,
            ambient=ambient,
            sunlight=sun,
        )
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad scenario config: {exc!r}") from exc


def scenario_to_dict(script: ScenarioScript) -> dict:
    def rel(ts: int) -> float:
        return (ts - script.epoch) / MS_PER_MINUTE

    events = []
    for e in script.events:
        if isinstance(e, OccupyRoom):
            item = {
                "kind": "occupy",
                "start": rel(e.start),
                "end": rel(e.end),
                "room": e.room_id,
                "posture": e.posture.name.lower(),
            }
            if e.position is not None:
                item["position"] = list(e.position)
            if e.path is not None:
                item["path"] = [list(p) for p in e.path]
            if e.orientation_deg:
                item["orientation_deg"] = e.orientation_deg
            if e.turnovers:
                item["turnovers"] = [(t - e.start) / MS_PER_MINUTE for t in e.turnovers]
            events.append(item)
        elif isinstance(e, LeaveHome):
            events.append({"kind": "leave_home", "at": rel(e.at)})
        elif isinstance(e, ReturnHome):
            events.append({"kind": "return_home", "at": rel(e.at)})
        elif isinstance(e, LampToggle):
            events.append({"kind": "lamp", "at": rel(e.at), "room": e.room_id, "on": e.on})
        elif isinstance(e, NoiseBurst):
            events.append(
                {
                    "kind": "noise_burst",
                    "start": rel(e.start),
                    "end": rel(e.end),
                    "room": e.room_id,
                    "level": e.level,
                }
            )
        elif isinstance(e, VisitorEnter):
            events.append({"kind": "visitor_enter", "at": rel(e.at), "count": e.count})
        elif isinstance(e, VisitorLeave):
            events.append({"kind": "visitor_leave", "at": rel(e.at)})

    from datetime import datetime, timedelta

    origin = datetime(1970, 1, 1) + timedelta(milliseconds=script.epoch)
    data: dict = {
        "epoch": origin.isoformat(),
        "duration_min": script.duration_min,
        "events": events,
    }
    if script.ambient:
        data["ambient"] = {
            room: {
                k: v
                for k, v in profile.__dict__.items()
            }
            for room, profile in script.ambient.items()
        }
    if script.sunlight is not None:
        s = script.sunlight
        data["sunlight_patch"] = {
            "room": s.room_id,
            "row0": s.row0,
            "col0": s.col0,
            "row1": s.row1,
            "col1": s.col1,
            "clock_start": f"{s.clock_start // 3_600_000:02d}:{s.clock_start % 3_600_000 // 60_000:02d}",
            "clock_end": f"{s.clock_end // 3_600_000:02d}:{s.clock_end % 3_600_000 // 60_000:02d}",
            "delta_c": s.delta_c,
        }
    return data


def load_scenario(path: str | Path) -> ScenarioScript:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(script: ScenarioScript, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(script), fh, indent=2)
        fh.write("\n")

"""The stream generator: layout + script + seed -> deterministic sensor streams
plus the ground-truth label timeline.

Determinism: every random stream is keyed by (seed, sensor id, event index,
purpose), so output is byte-identical for the same inputs regardless of how
rendering is chunked internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import PipelineConfig
from ..core import (
    MS_PER_MINUTE,
    TEMP_MAX_C,
    TEMP_MIN_C,
    ActivityLabel,
    FrameBlock,
    PostureLabel,
    ReadingSeries,
    SensorKind,
    in_clock_window,
    quantize_pixels,
)
from ..errors import ConfigError
from ..layout import HomeLayout, RoomRole, validate_layout
from ..ingestion.packets import HubPacket, Redirector
from .render import (
    BLOB_PARAMS,
    blob_images,
    event_rng,
    fidget_offsets,
    path_positions,
    sensor_grid,
    turnover_offsets,
)
from .scenario import (
    LampToggle,
    LeaveHome,
    NoiseBurst,
    OccupyRoom,
    ReturnHome,
    ScenarioScript,
    VisitorEnter,
    VisitorLeave,
    validate_scenario,
)
from .truth import POSTURE_INTERVAL_MS, GroundTruthTimeline

MIN_PATCH_DWELL_MS = 120_000  # occupancy shorter than this leaves no residual heat
PATCH_CUTOFF_TAUS = 5.0
VISITOR_SLOTS = ((0.9, 0.7), (-0.9, 0.7), (0.9, -0.7), (-0.9, -0.7))
RENDER_CHUNK_FRAMES = 14_400  # one hour at 4 Hz


@dataclass
class SimParams:
    frame_period_ms: int = 250
    frame_jitter_frac: float = 0.04
    pixel_noise_sigma: float = 0.3
    env_period_ms: int = 5000
    motion_period_ms: int = 1000
    motion_epsilon_m: float = 0.05
    residual_tau_min: float = 10.0
    residual_amplitude_frac: float = 0.4
    lamp_delta: float = 150.0
    walk_speed_mps: float = 1.0
    passage_seconds: float = 3.0

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "SimParams":
        return cls(
            frame_period_ms=config.frame_period_ms,
            frame_jitter_frac=config.frame_jitter_frac,
            pixel_noise_sigma=config.pixel_noise_sigma,
            env_period_ms=config.env_period_ms,
            motion_period_ms=config.motion_period_ms,
            motion_epsilon_m=config.motion_epsilon_m,
            residual_tau_min=config.residual_tau_min,
            residual_amplitude_frac=config.residual_amplitude_frac,
            lamp_delta=config.lamp_delta,
            walk_speed_mps=config.walk_speed_mps,
            passage_seconds=config.passage_seconds,
        )


@dataclass
class StreamBundle:
    readings: list[ReadingSeries]
    frames: list[FrameBlock]
    truth: GroundTruthTimeline
    start: int
    end: int

    def readings_for(self, sensor_id: str) -> ReadingSeries | None:
        parts = [s for s in self.readings if s.sensor_id == sensor_id]
        if not parts:
            return None
        if len(parts) == 1:
            return parts[0]
        return ReadingSeries(
            sensor_id,
            parts[0].kind,
            np.concatenate([p.timestamps for p in parts]),
            np.concatenate([p.values for p in parts]),
        )

    def frames_for(self, sensor_id: str) -> list[FrameBlock]:
        return [b for b in self.frames if b.sensor_id == sensor_id]

    def to_packets(self, hub_id: str = "hub0") -> list[HubPacket]:
        """Batch the whole bundle through a per-minute redirector."""
        window_start = self.start - self.start % MS_PER_MINUTE
        redirector = Redirector(hub_id, window_start)
        for series in self.readings:
            for reading in series.iter_readings():
                redirector.add_reading(reading)
        for block in self.frames:
            redirector.add_frames(block)
        return redirector.flush_all(self.end - 1)


@dataclass
class _ResolvedOccupy:
    event: OccupyRoom
    index: int  # position in script.events (rng keying)
    base: np.ndarray  # resolved anchor position [2]

    @property
    def room_id(self) -> str:
        return self.event.room_id


class _ResidentModel:
    """Macro positions of the resident over time, resolved from the script."""

    def __init__(self, layout: HomeLayout, script: ScenarioScript, seed: int, params: SimParams):
        self.layout = layout
        self.script = script
        self.params = params
        self.resolved: list[_ResolvedOccupy] = []
        for index, ev in enumerate(script.events):
            if not isinstance(ev, OccupyRoom):
                continue
            if ev.position is not None:
                base = np.asarray(ev.position, dtype=np.float64)
            else:
                base = self._default_position(ev, index, seed)
            self.resolved.append(_ResolvedOccupy(ev, index, base))
        self.resolved.sort(key=lambda r: r.event.start)

    def _default_position(self, ev: OccupyRoom, index: int, seed: int) -> np.ndarray:
        """Anchor near the room's thermal sensor if it has one, else the room
        module position, with a small per-event jitter."""
        thermal = [
            s
            for s in self.layout.thermal_sensors()
            if s.room_id == ev.room_id
        ]
        if thermal:
            anchor = np.asarray(self.layout.placement_of(thermal[0].sensor_id).position)
        else:
            placements = [p for p in self.layout.placements if p.room_id == ev.room_id]
            anchor = (
                np.asarray(placements[0].position)
                if placements
                else np.asarray(self.layout.room(ev.room_id).center())
            )
        rng = event_rng(seed, ev.room_id, index, 0)
        return anchor + rng.uniform(-0.25, 0.25, size=2)

    def positions_at(self, ts: np.ndarray) -> np.ndarray:
        """Macro positions [n, 2]; NaN when not inside any occupy event."""
        out = np.full((len(ts), 2), np.nan)
        for res in self.resolved:
            ev = res.event
            lo = int(np.searchsorted(ts, ev.start, side="left"))
            hi = int(np.searchsorted(ts, ev.end, side="left"))
            if hi <= lo:
                continue
            span = ts[lo:hi]
            if ev.path is not None:
                out[lo:hi] = path_positions(
                    ev.path, span - ev.start, self.params.walk_speed_mps
                )
            else:
                pos = np.repeat(res.base[None, :], hi - lo, axis=0)
                if ev.turnovers:
                    theta = math.radians(ev.orientation_deg)
                    minor = np.array([-math.sin(theta), math.cos(theta)])
                    pos = pos + turnover_offsets(ev.turnovers, span)[:, None] * minor
                out[lo:hi] = pos
        return out

    def end_position(self, res: _ResolvedOccupy) -> np.ndarray:
        ev = res.event
        if ev.path is not None:
            return path_positions(
                ev.path, np.array([ev.end - ev.start]), self.params.walk_speed_mps
            )[0]
        pos = res.base.copy()
        if ev.turnovers:
            theta = math.radians(ev.orientation_deg)
            minor = np.array([-math.sin(theta), math.cos(theta)])
            pos = pos + turnover_offsets(ev.turnovers, np.array([ev.end]))[0] * minor
        return pos


@dataclass
class _Passage:
    """A brief moving presence at the doorway (leave/return/visitor transit)."""

    at: int
    position: np.ndarray

    def positions_at(self, ts: np.ndarray, half_ms: float) -> np.ndarray:
        rel = (np.asarray(ts) - self.at) / 1000.0
        inside = np.abs(rel) <= half_ms / 1000.0
        out = np.full((len(ts), 2), np.nan)
        out[inside, 0] = self.position[0] + 0.5 * rel[inside]
        out[inside, 1] = self.position[1]
        return out


def _visitor_tracks(
    layout: HomeLayout, script: ScenarioScript, seed: int
) -> list[tuple[int, int, int, np.ndarray]]:
    """(start, end, slot index, base position) for every visitor body.

    Visitors are rendered in the living room only.
    """
    living = layout.rooms_with_role(RoomRole.LIVING_ROOM)
    if not living:
        return []
    thermal = [s for s in layout.thermal_sensors() if s.room_id == living[0].room_id]
    if thermal:
        anchor = np.asarray(layout.placement_of(thermal[0].sensor_id).position)
    else:
        anchor = np.asarray(living[0].center())
    tracks = []
    for span_idx, (lo, hi, count) in enumerate(script.visitor_intervals()):
        for v in range(min(count, len(VISITOR_SLOTS))):
            rng = event_rng(seed, "visitors", span_idx, 100 + v)
            base = anchor + np.asarray(VISITOR_SLOTS[v]) + rng.uniform(-0.1, 0.1, size=2)
            tracks.append((lo, hi, v, base))
    return tracks


def simulate(
    layout: HomeLayout,
    script: ScenarioScript,
    seed: int,
    params: SimParams | None = None,
) -> StreamBundle:
    """Pure function of (layout, script, seed): same inputs, byte-identical output."""
    violations = validate_layout(layout)
    if violations:
        raise ConfigError(f"invalid layout: {violations}")
    validate_scenario(script, layout)
    params = params or SimParams()

    resident = _ResidentModel(layout, script, seed, params)
    visitors = _visitor_tracks(layout, script, seed)
    passages = _collect_passages(layout, script)

    readings: list[ReadingSeries] = []
    frames: list[FrameBlock] = []

    for spec in sorted(layout.sensors(), key=lambda s: s.sensor_id):
        if spec.kind.is_thermal:
            frames.extend(
                _render_sensor(layout, script, spec, resident, visitors, seed, params)
            )
        elif spec.kind is SensorKind.MOTION:
            readings.append(
                motion_series(layout, script, spec, resident, passages, seed, params)
            )
        else:
            readings.append(environment_series(layout, script, spec, seed, params))

    truth = _build_truth(layout, script, resident, visitors)
    return StreamBundle(readings, frames, truth, script.start, script.end)


# ---------------------------------------------------------------------------
# thermal rendering


def _render_sensor(
    layout: HomeLayout,
    script: ScenarioScript,
    spec,
    resident: _ResidentModel,
    visitors,
    seed: int,
    params: SimParams,
) -> list[FrameBlock]:
    placement = layout.placement_of(spec.sensor_id)
    resolution = spec.kind.resolution
    xs, ys = sensor_grid(placement, resolution)
    profile = script.profile(spec.room_id)
    tz = layout.tz_offset_min

    n_frames = (script.end - script.start) // params.frame_period_ms
    nominal = script.start + params.frame_period_ms * np.arange(n_frames, dtype=np.int64)
    jitter_rng = event_rng(seed, spec.sensor_id, 0, 1)
    jitter = np.rint(
        jitter_rng.uniform(-params.frame_jitter_frac, params.frame_jitter_frac, n_frames)
        * params.frame_period_ms
    ).astype(np.int64)
    timestamps = nominal + jitter
    if len(timestamps):
        timestamps[0] = max(timestamps[0], script.start)  # never precede the scenario

    # occupancy spans seen by this sensor
    spans = []
    for res in resident.resolved:
        if res.room_id == spec.room_id:
            spans.append(("resident", res))
    for track_idx, (lo, hi, slot, base) in enumerate(visitors):
        living = layout.rooms_with_role(RoomRole.LIVING_ROOM)
        if living and living[0].room_id == spec.room_id:
            spans.append(("visitor", (lo, hi, track_idx, base)))

    patches = _patch_schedule(resident, visitors, spec.room_id, layout, params)

    noise_rng = event_rng(seed, spec.sensor_id, 0, 2)
    tau_ms = params.residual_tau_min * MS_PER_MINUTE

    blocks = []
    for lo in range(0, n_frames, RENDER_CHUNK_FRAMES):
        hi = min(lo + RENDER_CHUNK_FRAMES, n_frames)
        ts = timestamps[lo:hi]
        pixels = np.empty((hi - lo, resolution, resolution), dtype=np.float64)
        pixels[:] = np.asarray(profile.temperature(ts, script.start, tz))[:, None, None]

        for kind, payload in spans:
            if kind == "resident":
                _add_resident_blob(
                    pixels, nominal[lo:hi], ts, xs, ys, payload, resident, seed,
                    spec.sensor_id, params, script.start,
                )
            else:
                _add_visitor_blob(
                    pixels, nominal[lo:hi], xs, ys, payload, seed,
                    spec.sensor_id, params, script.start,
                )

        for patch in patches:
            _add_patch(pixels, ts, xs, ys, patch, tau_ms)

        sun = script.sunlight
        if sun is not None and sun.room_id == spec.room_id:
            active = np.array(
                [in_clock_window(int(t), sun.clock_start, sun.clock_end, tz) for t in ts]
            )
            if active.any():
                pixels[active, sun.row0 : sun.row1, sun.col0 : sun.col1] += sun.delta_c

        if params.pixel_noise_sigma > 0:
            pixels += noise_rng.normal(0.0, params.pixel_noise_sigma, size=pixels.shape)

        np.clip(pixels, TEMP_MIN_C, TEMP_MAX_C, out=pixels)
        blocks.append(FrameBlock(spec.sensor_id, resolution, ts.copy(), quantize_pixels(pixels)))
    return blocks


def _event_frame_range(nominal: np.ndarray, start: int, end: int) -> tuple[int, int]:
    lo = int(np.searchsorted(nominal, start, side="left"))
    hi = int(np.searchsorted(nominal, end, side="left"))
    return lo, hi


def _fidget_span(posture, offset: int, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Fidget samples [offset, offset+n) of an event's deterministic stream.

    The rng is freshly keyed per call, so drawing offset+n samples and slicing
    keeps results identical regardless of render chunk boundaries.
    """
    offsets, flicker = fidget_offsets(posture, offset + n, rng)
    return offsets[offset:], flicker[offset:]


def _add_resident_blob(
    pixels, nominal, ts, xs, ys, res: _ResolvedOccupy, resident, seed,
    sensor_id, params, script_start,
):
    ev = res.event
    lo, hi = _event_frame_range(nominal, ev.start, ev.end)
    if hi <= lo:
        return
    # clamp jittered timestamps into the event so boundary frames keep a position
    span = np.clip(ts[lo:hi], ev.start, ev.end - 1)
    centers = resident.positions_at(span)
    # the fidget stream is indexed by the frame's position within the event
    # (computed on the rigid nominal grid) so chunking cannot shift it
    rng = event_rng(seed, sensor_id, res.index, 3)
    first_idx = -((ev.start - script_start) // -params.frame_period_ms)  # ceil div
    offset0 = int((nominal[lo] - script_start) // params.frame_period_ms - first_idx)
    offsets, flicker = _fidget_span(ev.posture, offset0, len(span), rng)
    centers = centers + offsets
    sx, sy, amp = BLOB_PARAMS[ev.posture]
    theta = math.radians(ev.orientation_deg)
    pixels[lo:hi] += blob_images(
        xs, ys, centers[:, 0], centers[:, 1], sx, sy, amp * flicker, theta
    )


def _add_visitor_blob(pixels, nominal, xs, ys, payload, seed, sensor_id, params, script_start):
    lo_ms, hi_ms, track_idx, base = payload
    lo, hi = _event_frame_range(nominal, lo_ms, hi_ms)
    if hi <= lo:
        return
    rng = event_rng(seed, sensor_id, track_idx, 4)
    first_idx = -((lo_ms - script_start) // -params.frame_period_ms)
    offset0 = int((nominal[lo] - script_start) // params.frame_period_ms - first_idx)
    offsets, flicker = _fidget_span(PostureLabel.SIT, offset0, hi - lo, rng)
    centers = base[None, :] + offsets
    sx, sy, amp = BLOB_PARAMS[PostureLabel.SIT]
    pixels[lo:hi] += blob_images(xs, ys, centers[:, 0], centers[:, 1], sx, sy, amp * flicker)


@dataclass
class _Patch:
    t0: int
    center: np.ndarray
    posture: PostureLabel
    orientation_rad: float
    amplitude_c: float


def _patch_schedule(resident, visitors, room_id, layout, params) -> list[_Patch]:
    """Residual-heat patches left in this room by seated/lying occupancy."""
    patches = []
    for res in resident.resolved:
        ev = res.event
        if ev.room_id != room_id:
            continue
        if ev.posture not in (PostureLabel.SIT, PostureLabel.LIE_DOWN):
            continue
        if ev.end - ev.start < MIN_PATCH_DWELL_MS:
            continue
        _, _, amp = BLOB_PARAMS[ev.posture]
        patches.append(
            _Patch(
                t0=ev.end,
                center=resident.end_position(res),
                posture=ev.posture,
                orientation_rad=math.radians(ev.orientation_deg),
                amplitude_c=params.residual_amplitude_frac * amp,
            )
        )
    living = layout.rooms_with_role(RoomRole.LIVING_ROOM)
    if living and living[0].room_id == room_id:
        for lo, hi, slot, base in visitors:
            if hi - lo < MIN_PATCH_DWELL_MS:
                continue
            _, _, amp = BLOB_PARAMS[PostureLabel.SIT]
            patches.append(
                _Patch(hi, base, PostureLabel.SIT, 0.0, params.residual_amplitude_frac * amp)
            )
    return patches


def _add_patch(pixels, ts, xs, ys, patch: _Patch, tau_ms: float):
    cutoff = patch.t0 + PATCH_CUTOFF_TAUS * tau_ms
    lo = int(np.searchsorted(ts, patch.t0, side="left"))
    hi = int(np.searchsorted(ts, cutoff, side="left"))
    if hi <= lo:
        return
    span = ts[lo:hi]
    amp = patch.amplitude_c * np.exp(-(span - patch.t0) / tau_ms)
    sx, sy, _ = BLOB_PARAMS[patch.posture]
    centers = np.repeat(patch.center[None, :], hi - lo, axis=0)
    pixels[lo:hi] += blob_images(
        xs, ys, centers[:, 0], centers[:, 1], sx, sy, amp, patch.orientation_rad
    )


# ---------------------------------------------------------------------------
# scalar sensors


def _collect_passages(layout: HomeLayout, script: ScenarioScript) -> list[_Passage]:
    doorway = layout.rooms_with_role(RoomRole.DOORWAY)
    if not doorway:
        return []
    door_sensors = [
        s
        for s in layout.sensors(kind=SensorKind.MOTION, room_id=doorway[0].room_id)
    ]
    if door_sensors:
        pos = np.asarray(layout.placement_of(door_sensors[0].sensor_id).position)
    else:
        pos = np.asarray(doorway[0].center())
    passages = []
    for ev in script.events:
        if isinstance(ev, (LeaveHome, ReturnHome)):
            passages.append(_Passage(ev.at, pos))
        elif isinstance(ev, (VisitorEnter, VisitorLeave)):
            passages.append(_Passage(ev.at, pos))
    return passages


def motion_series(
    layout: HomeLayout,
    script: ScenarioScript,
    spec,
    resident: _ResidentModel,
    passages: list[_Passage],
    seed: int,
    params: SimParams,
) -> ReadingSeries:
    placement = layout.placement_of(spec.sensor_id)
    sensor_pos = np.asarray(placement.position)
    n = (script.end - script.start) // params.motion_period_ms
    ts = script.start + params.motion_period_ms * np.arange(n, dtype=np.int64)

    half_passage_ms = params.passage_seconds * 500.0
    tracks = [resident.positions_at(ts)]
    for p in passages:
        tracks.append(p.positions_at(ts, half_passage_ms))

    triggered = np.zeros(n, dtype=bool)
    for pos in tracks:
        dist = np.hypot(pos[:, 0] - sensor_pos[0], pos[:, 1] - sensor_pos[1])
        inside = dist <= placement.sensing_radius
        step = np.hypot(np.diff(pos[:, 0]), np.diff(pos[:, 1]))
        moved = np.zeros(n, dtype=bool)
        moved[1:] = step > params.motion_epsilon_m
        triggered |= inside & moved & ~np.isnan(dist)

    return ReadingSeries(
        spec.sensor_id, SensorKind.MOTION, ts, triggered.astype(np.float64)
    )


def environment_series(
    layout: HomeLayout,
    script: ScenarioScript,
    spec,
    seed: int,
    params: SimParams,
) -> ReadingSeries:
    profile = script.profile(spec.room_id)
    tz = layout.tz_offset_min
    n = (script.end - script.start) // params.env_period_ms
    ts = script.start + params.env_period_ms * np.arange(n, dtype=np.int64)
    rng = event_rng(seed, spec.sensor_id, 0, 5)

    if spec.channel == "temperature":
        values = np.asarray(profile.temperature(ts, script.start, tz), dtype=np.float64)
        values = values + rng.normal(0.0, 0.05, n)
    elif spec.channel == "humidity":
        values = np.asarray(profile.humidity(ts, tz), dtype=np.float64)
        values = values + rng.normal(0.0, 0.2, n)
    elif spec.channel == "light":
        values = np.asarray(profile.light(ts, tz), dtype=np.float64)
        lamp = np.zeros(n)
        changes = [
            (e.at, 1.0 if e.on else 0.0)
            for e in script.events
            if isinstance(e, LampToggle) and e.room_id == spec.room_id
        ]
        for at, new_state in sorted(changes):
            lamp[ts >= at] = new_state
        values = values + lamp * params.lamp_delta + rng.normal(0.0, 1.0, n)
        values = np.maximum(values, 0.0)
    elif spec.channel == "noise":
        values = np.asarray(profile.noise(ts, tz), dtype=np.float64)
        for e in script.events:
            if isinstance(e, NoiseBurst) and e.room_id == spec.room_id:
                values = values + np.where((ts >= e.start) & (ts < e.end), e.level, 0.0)
        values = values + rng.normal(0.0, 1.0, n)
        values = np.maximum(values, 0.0)
    else:
        raise ConfigError(f"unknown environment channel {spec.channel!r}")

    return ReadingSeries(
        spec.sensor_id, spec.kind, ts, np.round(values * 100.0) / 100.0
    )


# ---------------------------------------------------------------------------
# truth


_ROOM_ACTIVITY = {
    RoomRole.BEDROOM: ActivityLabel.SLEEPING,
    RoomRole.KITCHEN: ActivityLabel.KITCHEN_ACTIVITY,
    RoomRole.DINING_ROOM: ActivityLabel.DINING_ROOM_ACTIVITY,
    RoomRole.LIVING_ROOM: ActivityLabel.LIVING_ROOM_ACTIVITY,
    RoomRole.RESTROOM: ActivityLabel.RESTROOM,
}


def _overlap_seconds(grid_start: int, n: int, step_ms: int, lo: int, hi: int) -> np.ndarray:
    """Seconds of [lo, hi) overlapping each of n grid cells."""
    starts = grid_start + step_ms * np.arange(n, dtype=np.int64)
    ends = starts + step_ms
    overlap = np.minimum(ends, hi) - np.maximum(starts, lo)
    return np.maximum(overlap, 0) / 1000.0


def _build_truth(
    layout: HomeLayout,
    script: ScenarioScript,
    resident: _ResidentModel,
    visitors,
) -> GroundTruthTimeline:
    start, end = script.start, script.end
    n_minutes = (end - start) // MS_PER_MINUTE
    n_intervals = (end - start) // POSTURE_INTERVAL_MS

    # --- posture truth on the 5 s grid, per thermal sensor
    posture_truth: dict[str, np.ndarray] = {}
    mids = start + POSTURE_INTERVAL_MS * np.arange(n_intervals, dtype=np.int64) + POSTURE_INTERVAL_MS // 2
    resident_pos = resident.positions_at(mids)
    living = layout.rooms_with_role(RoomRole.LIVING_ROOM)
    living_id = living[0].room_id if living else None

    for spec in layout.thermal_sensors():
        placement = layout.placement_of(spec.sensor_id)
        hw = placement.fov_half_width
        px, py = placement.position
        codes = np.full(n_intervals, PostureLabel.NOT_HERE.value, dtype=np.uint8)

        for res in resident.resolved:
            ev = res.event
            if ev.room_id != spec.room_id:
                continue
            covered = (mids >= ev.start) & (mids < ev.end)
            in_fov = (
                covered
                & (np.abs(resident_pos[:, 0] - px) <= hw)
                & (np.abs(resident_pos[:, 1] - py) <= hw)
            )
            posture = PostureLabel.WALK if ev.path is not None else ev.posture
            codes[in_fov] = posture.value

        if spec.room_id == living_id:
            for lo, hi, slot, base in visitors:
                covered = (mids >= lo) & (mids < hi)
                only_empty = covered & (codes == PostureLabel.NOT_HERE.value)
                codes[only_empty] = PostureLabel.SIT.value
        posture_truth[spec.sensor_id] = codes

    # --- activity truth on the minute grid
    role_of_room = {r.room_id: r.role for r in layout.rooms}
    room_secs = {r.room_id: np.zeros(n_minutes) for r in layout.rooms}
    for res in resident.resolved:
        ev = res.event
        room_secs[ev.room_id] += _overlap_seconds(start, n_minutes, MS_PER_MINUTE, ev.start, ev.end)

    away_secs = np.zeros(n_minutes)
    for lo, hi in script.away_intervals():
        away_secs += _overlap_seconds(start, n_minutes, MS_PER_MINUTE, lo, hi)

    visitor_secs = np.zeros(n_minutes)
    seen_spans = set()
    for lo, hi, slot, base in visitors:
        key = (lo, hi)
        if key in seen_spans:
            continue
        seen_spans.add(key)
        visitor_secs += _overlap_seconds(start, n_minutes, MS_PER_MINUTE, lo, hi)

    restroom_rooms = [r.room_id for r in layout.rooms if r.role is RoomRole.RESTROOM]

    activity = np.empty(n_minutes, dtype=np.uint8)
    previous = ActivityLabel.NOT_AT_HOME
    for m in range(n_minutes):
        rest = sum(room_secs[r][m] for r in restroom_rooms)
        label: ActivityLabel
        if rest >= 3.0:
            label = ActivityLabel.RESTROOM
        elif visitor_secs[m] >= 30.0:
            label = ActivityLabel.VISITORS
        elif away_secs[m] >= 30.0:
            label = ActivityLabel.NOT_AT_HOME
        else:
            best_room = None
            best_secs = 0.0
            for room_id, secs in room_secs.items():
                if secs[m] > best_secs:
                    best_room, best_secs = room_id, secs[m]
            if best_room is not None and best_secs >= 30.0:
                role = role_of_room[best_room]
                label = _ROOM_ACTIVITY.get(role, previous)
            else:
                label = previous
        activity[m] = label.value
        previous = label

    return GroundTruthTimeline(
        start=start,
        end=end,
        posture_truth=posture_truth,
        activity_truth=activity,
        away_intervals=script.away_intervals(),
    )

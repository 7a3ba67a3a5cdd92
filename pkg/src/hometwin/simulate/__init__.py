"""Deterministic synthetic home: scripted behavior to sensor streams plus oracle labels."""

from .engine import SimParams, StreamBundle, simulate
from .scenario import (
    AmbientProfile,
    LampToggle,
    LeaveHome,
    NoiseBurst,
    OccupyRoom,
    ReturnHome,
    ScenarioScript,
    SunlightPatch,
    VisitorEnter,
    VisitorLeave,
    load_scenario,
    save_scenario,
)
from .truth import GroundTruthTimeline, load_truth_sidecar, write_truth_sidecar

__all__ = [
    "AmbientProfile",
    "GroundTruthTimeline",
    "LampToggle",
    "LeaveHome",
    "NoiseBurst",
    "OccupyRoom",
    "ReturnHome",
    "ScenarioScript",
    "SimParams",
    "StreamBundle",
    "SunlightPatch",
    "VisitorEnter",
    "VisitorLeave",
    "load_scenario",
    "load_truth_sidecar",
    "save_scenario",
    "simulate",
    "write_truth_sidecar",
]

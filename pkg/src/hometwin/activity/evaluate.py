"""Minute-level accuracy and confusion against the oracle timeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ACTIVITY_NAMES, UNKNOWN_ACTIVITY
from ..errors import AlignmentError
from ..simulate.truth import GroundTruthTimeline
from .rules import ActivityTimeline


@dataclass
class TimelineEvaluation:
    accuracy: float
    confusion: np.ndarray  # [8, 8]: seven activities plus Unknown
    n_minutes: int

    def to_text(self) -> str:
        names = [n[:12] for n in ACTIVITY_NAMES]
        width = max(len(n) for n in names) + 1
        lines = [
            f"minute-level accuracy: {self.accuracy:.4f} over {self.n_minutes} minutes",
            "confusion matrix (rows = truth, cols = prediction):",
            " " * width + " ".join(f"{n:>12s}" for n in names),
        ]
        for i, name in enumerate(names):
            row = " ".join(f"{int(v):12d}" for v in self.confusion[i])
            lines.append(f"{name:>{width}s} {row}")
        return "\n".join(lines) + "\n"


def evaluate_timeline(
    predicted: ActivityTimeline, truth: GroundTruthTimeline
) -> TimelineEvaluation:
    """Fraction of minutes matching the oracle; Unknown always counts as wrong."""
    if predicted.start != truth.start:
        raise AlignmentError(
            f"timeline starts differ: predicted {predicted.start}, truth {truth.start}"
        )
    if len(predicted.entries) != truth.n_minutes:
        raise AlignmentError(
            f"minute counts differ: predicted {len(predicted.entries)}, "
            f"truth {truth.n_minutes}"
        )
    for entry, minute in zip(predicted.entries, truth.minute_starts()):
        if entry.minute_start != int(minute):
            raise AlignmentError("minute grids are misaligned")

    confusion = np.zeros((8, 8), dtype=np.int64)
    hits = 0
    for entry, truth_code in zip(predicted.entries, truth.activity_truth):
        pred = entry.label if entry.label != UNKNOWN_ACTIVITY else 7
        confusion[int(truth_code), pred] += 1
        if pred == int(truth_code):
            hits += 1
    n = truth.n_minutes
    return TimelineEvaluation(hits / n if n else 0.0, confusion, n)

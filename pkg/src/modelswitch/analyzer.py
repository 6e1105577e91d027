"""Scoring: turn windowed observations into per-model desirability values.

A score is min(current_cpu, windowed_cpu) * (1 - windowed_confidence /
current_confidence). Lower is better everywhere in this package: the value
goes negative exactly when the model's current confidence sits below its
own recent average, so a dip reads as attractive and a lucky streak reads
as expensive. Confidence enters only as a ratio, so current and windowed
confidence merely have to share a unit.
"""

from __future__ import annotations

import sys

from modelswitch.domain import FrameMetrics, Score, WindowAggregate
from modelswitch.knowledge import ScoreTable
from modelswitch.monitor import Monitor

# Written in place of a score when the current confidence is zero: the
# largest finite float, so exploitation can never prefer the model while
# exploration may still visit it.
ZERO_CONFIDENCE_SCORE = sys.float_info.max


class ZeroConfidence(Exception):
    """Score undefined: the frame carried no detection confidence."""


def compute_score(
    current_cpu: float, current_confidence: float, aggregate: WindowAggregate
) -> float:
    """Score one model from its latest frame and its window averages."""
    if current_confidence == 0.0:
        raise ZeroConfidence(aggregate.model)
    return min(current_cpu, aggregate.avg_cpu) * (
        1.0 - aggregate.avg_confidence / current_confidence
    )


class Analyzer:
    """Keeps the score table in step with what the monitor has seen."""

    def __init__(self, monitor: Monitor, table: ScoreTable):
        self._monitor = monitor
        self._table = table

    def refresh_scores(self, frame: FrameMetrics) -> Score:
        """Re-score the model that just processed a frame; other entries keep
        their previous (possibly stale) values."""
        aggregate = self._monitor.aggregate(frame.model)
        if aggregate is None:
            # refresh_scores is only called after the frame was recorded,
            # so the window cannot be empty here.
            raise RuntimeError(f"no window data for {frame.model}")
        try:
            value = compute_score(frame.cpu_usage, frame.confidence_score, aggregate)
        except ZeroConfidence:
            value = ZERO_CONFIDENCE_SCORE
        score = Score(model=frame.model, value=value, computed_at_frame=frame.frame_index)
        self._table.update(score)
        return score

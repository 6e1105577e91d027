"""Per-frame metric collection and sliding-window aggregation.

Each model keeps its own fixed-capacity window of recent frame metrics;
aggregates are plain arithmetic means over whatever the window currently
holds. Recording also appends the metrics to the shared log registry, so
every processed frame lands in exactly one window entry and one log row.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from modelswitch.domain import FrameMetrics, ModelId, WindowAggregate
from modelswitch.knowledge import LogRegistry, UnknownModel

DEFAULT_WINDOW_CAPACITY = 30


class OutOfOrderFrame(Exception):
    """A frame index at or below the last one recorded for that model."""


class MetricsWindow:
    """Fixed-capacity FIFO of one model's recent frame metrics."""

    def __init__(self, model: ModelId, capacity: int):
        if capacity <= 0:
            raise ValueError(f"window capacity must be positive: {capacity}")
        self.model = model
        self.capacity = capacity
        self._entries: deque[FrameMetrics] = deque(maxlen=capacity)
        self._last_frame = -1

    def record(self, metrics: FrameMetrics) -> None:
        if metrics.frame_index <= self._last_frame:
            raise OutOfOrderFrame(
                f"{self.model}: frame {metrics.frame_index} after {self._last_frame}"
            )
        self._last_frame = metrics.frame_index
        self._entries.append(metrics)

    def aggregate(self) -> WindowAggregate | None:
        """Mean confidence and CPU over the current window; None when empty."""
        if not self._entries:
            return None
        n = len(self._entries)
        return WindowAggregate(
            model=self.model,
            avg_confidence=sum(m.confidence_score for m in self._entries) / n,
            avg_cpu=sum(m.cpu_usage for m in self._entries) / n,
            sample_count=n,
        )

    def latest(self) -> FrameMetrics | None:
        return self._entries[-1] if self._entries else None

    def __len__(self) -> int:
        return len(self._entries)


class Monitor:
    """Routes frame metrics into per-model windows and the log registry."""

    def __init__(
        self,
        model_ids: Iterable[ModelId],
        registry: LogRegistry,
        capacity: int = DEFAULT_WINDOW_CAPACITY,
    ):
        self._windows = {m: MetricsWindow(m, capacity) for m in model_ids}
        self._registry = registry

    def _window(self, model: ModelId) -> MetricsWindow:
        try:
            return self._windows[model]
        except KeyError:
            raise UnknownModel(model) from None

    def record(self, metrics: FrameMetrics, sim_time_ms: float) -> None:
        self._window(metrics.model).record(metrics)
        self._registry.append_metrics(metrics, sim_time_ms)

    def aggregate(self, model: ModelId) -> WindowAggregate | None:
        return self._window(model).aggregate()

    def latest(self, model: ModelId) -> FrameMetrics | None:
        return self._window(model).latest()

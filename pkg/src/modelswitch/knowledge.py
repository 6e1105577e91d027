"""Shared knowledge for the control loop: models, scores, run logs.

The log registry is append-only and is the single source of truth for
everything a run emits. Exports are plain UTF-8 CSV with LF line endings
and reals printed with 4 decimal places, so identical runs produce
byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

from modelswitch.domain import (
    FrameMetrics,
    ModelId,
    Score,
    SelectionDecision,
    SwitchEvent,
)
from modelswitch.sim import ModelProfile

METRICS_FILENAME = "metrics.csv"
EVENTS_FILENAME = "events.csv"

METRICS_HEADER = (
    "frame_index,sim_time_ms,model_id,cpu_usage_pct,confidence,"
    "detection_count,inference_time_ms,battery_mah"
)
EVENTS_HEADER = "frame_index,event_type,mode,random_draw,from_model,to_model,switch_time_ms"


class UnknownModel(Exception):
    """A model id that is not registered in the repository."""


class IoFailure(Exception):
    """A log file could not be written or read; carries the path."""

    def __init__(self, path: Path | str, cause: Exception):
        super().__init__(f"{path}: {cause}")
        self.path = Path(path)
        self.cause = cause


class ModelRepository:
    """Registered model profiles, in registration order."""

    def __init__(self, profiles: tuple[ModelProfile, ...] | list[ModelProfile] = ()):
        self._profiles: dict[ModelId, ModelProfile] = {}
        for profile in profiles:
            self.register(profile)

    def register(self, profile: ModelProfile) -> None:
        if profile.model in self._profiles:
            raise ValueError(f"duplicate model id: {profile.model}")
        self._profiles[profile.model] = profile

    def get(self, model: ModelId) -> ModelProfile:
        try:
            return self._profiles[model]
        except KeyError:
            raise UnknownModel(model) from None

    def ids(self) -> tuple[ModelId, ...]:
        return tuple(self._profiles)

    def __len__(self) -> int:
        return len(self._profiles)

    def __contains__(self, model: ModelId) -> bool:
        return model in self._profiles


class ScoreTable:
    """Current score per model. Lower value means a more attractive model."""

    def __init__(self, entries: Mapping[ModelId, Score]):
        self._entries: dict[ModelId, Score] = dict(entries)

    @classmethod
    def initialize(cls, model_ids: tuple[ModelId, ...], value: float = 0.0) -> "ScoreTable":
        """Fresh table: every model starts at the given value (frame 0)."""
        return cls({m: Score(model=m, value=value, computed_at_frame=0) for m in model_ids})

    def update(self, score: Score) -> None:
        if score.model not in self._entries:
            raise UnknownModel(score.model)
        self._entries[score.model] = score

    def get(self, model: ModelId) -> Score:
        try:
            return self._entries[model]
        except KeyError:
            raise UnknownModel(model) from None

    def snapshot(self) -> "ScoreTable":
        """Point-in-time copy; later updates to this table do not leak into it."""
        return ScoreTable(self._entries)

    def values(self) -> dict[ModelId, float]:
        """Plain id -> score-value mapping (what planners consume)."""
        return {m: s.value for m, s in self._entries.items()}

    def __iter__(self) -> Iterator[Score]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True, slots=True)
class MetricsRecord:
    sim_time_ms: float
    metrics: FrameMetrics


@dataclass(frozen=True, slots=True)
class DecisionRecord:
    frame_index: int
    sim_time_ms: float
    decision: SelectionDecision


@dataclass(frozen=True, slots=True)
class SwitchRecord:
    sim_time_ms: float
    event: SwitchEvent


def _fmt(value: float) -> str:
    return f"{value:.4f}"


class LogRegistry:
    """Append-only run log; frame indices never decrease."""

    def __init__(self) -> None:
        self._metrics: list[MetricsRecord] = []
        self._events: list[DecisionRecord | SwitchRecord] = []
        self._last_frame = -1

    def _advance(self, frame_index: int) -> None:
        if frame_index < self._last_frame:
            raise ValueError(
                f"frame_index went backwards: {frame_index} after {self._last_frame}"
            )
        self._last_frame = frame_index

    def append_metrics(self, metrics: FrameMetrics, sim_time_ms: float) -> None:
        self._advance(metrics.frame_index)
        self._metrics.append(MetricsRecord(sim_time_ms=sim_time_ms, metrics=metrics))

    def append_decision(
        self, frame_index: int, sim_time_ms: float, decision: SelectionDecision
    ) -> None:
        self._advance(frame_index)
        self._events.append(
            DecisionRecord(frame_index=frame_index, sim_time_ms=sim_time_ms, decision=decision)
        )

    def append_switch(self, event: SwitchEvent, sim_time_ms: float) -> None:
        self._advance(event.frame_index)
        self._events.append(SwitchRecord(sim_time_ms=sim_time_ms, event=event))

    @property
    def metrics_records(self) -> tuple[MetricsRecord, ...]:
        return tuple(self._metrics)

    @property
    def event_records(self) -> tuple[DecisionRecord | SwitchRecord, ...]:
        return tuple(self._events)

    def export(self, out_dir: Path | str) -> tuple[Path, Path]:
        """Write metrics.csv and events.csv into out_dir; returns both paths."""
        out = Path(out_dir)
        metrics_path = out / METRICS_FILENAME
        events_path = out / EVENTS_FILENAME
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(METRICS_HEADER + "\n")
                for rec in self._metrics:
                    m = rec.metrics
                    # battery_mah stays empty: the simulator measures no battery.
                    fh.write(
                        f"{m.frame_index},{_fmt(rec.sim_time_ms)},{m.model},"
                        f"{_fmt(m.cpu_usage)},{_fmt(m.confidence_score)},"
                        f"{m.detection_count},{_fmt(m.inference_time_ms)},\n"
                    )
        except OSError as exc:
            raise IoFailure(metrics_path, exc) from exc
        try:
            with open(events_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(EVENTS_HEADER + "\n")
                for rec in self._events:
                    if isinstance(rec, DecisionRecord):
                        d = rec.decision
                        draw = "" if d.random_draw is None else _fmt(d.random_draw)
                        fh.write(
                            f"{rec.frame_index},decision,{d.mode.value},{draw},"
                            f"{d.previous},{d.selected},\n"
                        )
                    else:
                        e = rec.event
                        fh.write(
                            f"{e.frame_index},switch,,,{e.from_model},{e.to_model},"
                            f"{_fmt(e.switch_time_ms)}\n"
                        )
        except OSError as exc:
            raise IoFailure(events_path, exc) from exc
        return metrics_path, events_path


def load_metrics_csv(path: Path | str) -> list[tuple[float, FrameMetrics]]:
    """Parse a metrics.csv back into (sim_time_ms, FrameMetrics) rows."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    if not lines or lines[0] != METRICS_HEADER:
        raise ValueError(f"{path}: unexpected metrics header")
    rows: list[tuple[float, FrameMetrics]] = []
    for line in lines[1:]:
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 8:
            raise ValueError(f"{path}: malformed row: {line!r}")
        rows.append(
            (
                float(fields[1]),
                FrameMetrics(
                    frame_index=int(fields[0]),
                    model=fields[2],
                    cpu_usage=float(fields[3]),
                    confidence_score=float(fields[4]),
                    detection_count=int(fields[5]),
                    inference_time_ms=float(fields[6]),
                ),
            )
        )
    return rows


def load_events_csv(path: Path | str) -> list[dict[str, str]]:
    """Parse an events.csv into raw field dicts (strings as written)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    if not lines or lines[0] != EVENTS_HEADER:
        raise ValueError(f"{path}: unexpected events header")
    names = EVENTS_HEADER.split(",")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != len(names):
            raise ValueError(f"{path}: malformed row: {line!r}")
        rows.append(dict(zip(names, fields)))
    return rows

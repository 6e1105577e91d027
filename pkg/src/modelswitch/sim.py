"""Deterministic workload simulator.

Generates a seeded traffic-camera trace (object density rises for a rush
segment, then falls back) and synthesizes per-frame inference results for
a given model profile. All randomness flows through ``random.Random``
(Mersenne Twister, a named and portable generator); gaussian and poisson
draws below are explicit transforms of its uniform output so a seed
reproduces the exact same trace on any platform.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from random import Random
from typing import Sequence

from modelswitch.domain import BBox, Detection, ModelId

DEFAULT_FPS = 60
DEFAULT_DURATION_S = 1800
DEFAULT_SEED = 12345

# Labels drawn for synthetic detections; carried through for log realism only.
OBJECT_CLASSES = ("car", "bus", "truck", "motorcycle", "rickshaw")


class InvalidSchedule(Exception):
    """Density schedule does not cover the trace duration."""


@dataclass(frozen=True, slots=True)
class ModelProfile:
    """Cost/quality profile of one synthetic detection model."""

    model: ModelId
    base_cpu_pct: float
    cpu_per_object_pct: float
    base_confidence: float
    confidence_noise_sd: float
    detection_recall: float
    switch_latency_ms: float
    inference_time_ms: float

    def __post_init__(self) -> None:
        if not self.model:
            raise ValueError("model id must be non-empty")
        if not 0.0 <= self.base_cpu_pct <= 100.0:
            raise ValueError(f"base_cpu_pct out of range: {self.base_cpu_pct}")
        if self.cpu_per_object_pct < 0.0:
            raise ValueError(f"negative cpu_per_object_pct: {self.cpu_per_object_pct}")
        if not 0.0 <= self.base_confidence <= 1.0:
            raise ValueError(f"base_confidence out of range: {self.base_confidence}")
        if self.confidence_noise_sd < 0.0:
            raise ValueError(f"negative confidence_noise_sd: {self.confidence_noise_sd}")
        if not 0.0 <= self.detection_recall <= 1.0:
            raise ValueError(f"detection_recall out of range: {self.detection_recall}")
        if self.switch_latency_ms < 0.0:
            raise ValueError(f"negative switch_latency_ms: {self.switch_latency_ms}")
        if self.inference_time_ms <= 0.0:
            raise ValueError(f"inference_time_ms must be positive: {self.inference_time_ms}")


@dataclass(frozen=True, slots=True)
class ScheduleSegment:
    """One stretch of the density schedule."""

    start_s: float
    mean_objects: float
    complexity: float


@dataclass(frozen=True, slots=True)
class SimFrame:
    """Scene state for one trace frame."""

    frame_index: int
    object_count: int
    complexity: float


def default_segments() -> tuple[ScheduleSegment, ...]:
    """Off-peak, rush hour, off-peak again, in three equal stretches."""
    third = DEFAULT_DURATION_S / 3
    return (
        ScheduleSegment(start_s=0.0, mean_objects=3.0, complexity=0.1),
        ScheduleSegment(start_s=third, mean_objects=12.0, complexity=0.6),
        ScheduleSegment(start_s=2 * third, mean_objects=3.0, complexity=0.1),
    )


@dataclass(frozen=True)
class TraceConfig:
    """Everything needed to regenerate a trace bit-for-bit."""

    fps: int = DEFAULT_FPS
    duration_s: float = DEFAULT_DURATION_S
    segments: tuple[ScheduleSegment, ...] = field(default_factory=default_segments)
    rng_seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError(f"fps must be positive: {self.fps}")
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be positive: {self.duration_s}")
        validate_segments(self.segments, self.duration_s)

    @property
    def total_frames(self) -> int:
        return int(round(self.fps * self.duration_s))


def validate_segments(segments: Sequence[ScheduleSegment], duration_s: float) -> None:
    if not segments:
        raise InvalidSchedule("schedule needs at least one segment")
    if segments[0].start_s != 0.0:
        raise InvalidSchedule(f"first segment must start at 0, got {segments[0].start_s}")
    for before, after in zip(segments, segments[1:]):
        if after.start_s <= before.start_s:
            raise InvalidSchedule("segment starts must be strictly increasing")
    for seg in segments:
        if seg.start_s >= duration_s:
            raise InvalidSchedule(f"segment start {seg.start_s} beyond duration {duration_s}")
        if seg.mean_objects < 0.0:
            raise InvalidSchedule(f"negative mean_objects: {seg.mean_objects}")
        if not 0.0 <= seg.complexity <= 1.0:
            raise InvalidSchedule(f"complexity out of range: {seg.complexity}")


def gaussian(rng: Random, mu: float = 0.0, sigma: float = 1.0) -> float:
    """One normal draw via the Box-Muller transform of two uniforms.

    Kept explicit (rather than ``Random.gauss``) so the draw sequence is
    pinned to documented arithmetic on ``Random.random`` output.
    """
    # 1 - random() lies in (0, 1], so the log is always finite.
    u1 = 1.0 - rng.random()
    u2 = rng.random()
    return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def poisson(rng: Random, mean: float) -> int:
    """One poisson draw via Knuth's product-of-uniforms method."""
    if mean < 0.0:
        raise ValueError(f"negative poisson mean: {mean}")
    threshold = math.exp(-mean)
    count = 0
    product = rng.random()
    while product > threshold:
        count += 1
        product *= rng.random()
    return count


def _segment_spans(
    segments: Sequence[ScheduleSegment], duration_s: float
) -> list[tuple[ScheduleSegment, float, float]]:
    """Pair each segment with its [start, end) span and the complexity it ramps toward."""
    spans = []
    for i, seg in enumerate(segments):
        end = segments[i + 1].start_s if i + 1 < len(segments) else duration_s
        target = segments[i + 1].complexity if i + 1 < len(segments) else seg.complexity
        spans.append((seg, end, target))
    return spans


def generate_trace(config: TraceConfig) -> list[SimFrame]:
    """Materialize the full seeded frame sequence for one run.

    Object counts are poisson around the active segment's mean; complexity
    ramps linearly from each segment's value toward the next segment's
    (the last segment holds constant).
    """
    rng = Random(config.rng_seed)
    spans = _segment_spans(config.segments, config.duration_s)
    frames: list[SimFrame] = []
    span_i = 0
    for f in range(config.total_frames):
        t = f / config.fps
        while span_i + 1 < len(spans) and t >= spans[span_i][1]:
            span_i += 1
        seg, end, target = spans[span_i]
        width = end - seg.start_s
        ramp = (t - seg.start_s) / width if width > 0 else 0.0
        complexity = seg.complexity + (target - seg.complexity) * ramp
        frames.append(
            SimFrame(
                frame_index=f,
                object_count=poisson(rng, seg.mean_objects),
                complexity=complexity,
            )
        )
    return frames


def _synth_bbox(rng: Random) -> BBox:
    w = 0.05 + 0.25 * rng.random()
    h = 0.05 + 0.25 * rng.random()
    x = (1.0 - w) * rng.random()
    y = (1.0 - h) * rng.random()
    return (x, y, w, h)


def synth_inference(
    frame: SimFrame, profile: ModelProfile, rng: Random
) -> tuple[list[Detection], float, float]:
    """Synthesize one inference pass: (detections, cpu_usage_pct, inference_time_ms).

    Each scene object is found with probability ``detection_recall``. A found
    object's confidence is the profile's base degraded by scene complexity
    (factor 1 - 0.5 * complexity) plus gaussian noise, clamped to [0, 1].
    CPU usage is the profile's base plus a per-object term plus unit gaussian
    noise, clamped to [0, 100].
    """
    detections: list[Detection] = []
    degraded = profile.base_confidence * (1.0 - 0.5 * frame.complexity)
    for _ in range(frame.object_count):
        if rng.random() >= profile.detection_recall:
            continue
        conf = degraded + gaussian(rng, 0.0, profile.confidence_noise_sd)
        conf = min(1.0, max(0.0, conf))
        label = OBJECT_CLASSES[rng.randrange(len(OBJECT_CLASSES))]
        detections.append(Detection(confidence=conf, class_label=label, bbox=_synth_bbox(rng)))
    cpu = profile.base_cpu_pct + profile.cpu_per_object_pct * frame.object_count + gaussian(rng)
    cpu = min(100.0, max(0.0, cpu))
    return detections, cpu, profile.inference_time_ms


def default_profiles() -> tuple[ModelProfile, ...]:
    """Four-model family, lightest first. Values are simulator calibration."""
    return (
        ModelProfile(
            model="ssd-mobilenet-v1",
            base_cpu_pct=14.0,
            cpu_per_object_pct=0.3,
            base_confidence=0.45,
            confidence_noise_sd=0.03,
            detection_recall=0.90,
            switch_latency_ms=300.0,
            inference_time_ms=40.0,
        ),
        ModelProfile(
            model="efficientdet-lite0",
            base_cpu_pct=17.0,
            cpu_per_object_pct=0.3,
            base_confidence=0.55,
            confidence_noise_sd=0.04,
            detection_recall=0.92,
            switch_latency_ms=800.0,
            inference_time_ms=55.0,
        ),
        ModelProfile(
            model="efficientdet-lite1",
            base_cpu_pct=20.0,
            cpu_per_object_pct=0.3,
            base_confidence=0.62,
            confidence_noise_sd=0.10,
            detection_recall=0.95,
            switch_latency_ms=950.0,
            inference_time_ms=70.0,
        ),
        ModelProfile(
            model="efficientdet-lite2",
            base_cpu_pct=24.0,
            cpu_per_object_pct=0.3,
            base_confidence=0.68,
            confidence_noise_sd=0.12,
            detection_recall=0.97,
            switch_latency_ms=1000.0,
            inference_time_ms=90.0,
        ),
    )


@dataclass(frozen=True)
class SimConfig:
    """Parsed experiment config: trace, model profiles, leftover sections."""

    trace: TraceConfig
    profiles: tuple[ModelProfile, ...]
    extras: dict[str, dict[str, str]]


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"[{section}] {key}: not a number: {raw!r}") from None


def parse_config(path: str) -> SimConfig:
    """Read trace settings and model profiles from an INI-style file.

    Recognized sections: ``[trace]`` (fps, duration_s, rng_seed),
    ``[segment.N]`` (start_s, mean_objects, complexity; N orders them) and
    ``[model.<id>]`` (profile fields minus the id). Anything else is passed
    through untouched for the caller. Missing sections fall back to the
    built-in defaults. Raises ``ValueError``/``InvalidSchedule`` on bad
    values and ``OSError`` if the file cannot be read.
    """
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)

    fps = DEFAULT_FPS
    duration_s = float(DEFAULT_DURATION_S)
    rng_seed = DEFAULT_SEED
    if parser.has_section("trace"):
        sec = parser["trace"]
        fps = int(sec.get("fps", fps))
        duration_s = _parse_float("trace", "duration_s", sec.get("duration_s", str(duration_s)))
        rng_seed = int(sec.get("rng_seed", rng_seed))

    segment_keys = sorted(
        (name for name in parser.sections() if name.startswith("segment.")),
        key=lambda name: int(name.split(".", 1)[1]),
    )
    if segment_keys:
        segments = tuple(
            ScheduleSegment(
                start_s=_parse_float(name, "start_s", parser[name]["start_s"]),
                mean_objects=_parse_float(name, "mean_objects", parser[name]["mean_objects"]),
                complexity=_parse_float(name, "complexity", parser[name]["complexity"]),
            )
            for name in segment_keys
        )
    else:
        segments = default_segments()

    model_sections = [name for name in parser.sections() if name.startswith("model.")]
    if model_sections:
        profiles = tuple(
            ModelProfile(
                model=name.split(".", 1)[1],
                base_cpu_pct=_parse_float(name, "base_cpu_pct", parser[name]["base_cpu_pct"]),
                cpu_per_object_pct=_parse_float(
                    name, "cpu_per_object_pct", parser[name]["cpu_per_object_pct"]
                ),
                base_confidence=_parse_float(
                    name, "base_confidence", parser[name]["base_confidence"]
                ),
                confidence_noise_sd=_parse_float(
                    name, "confidence_noise_sd", parser[name]["confidence_noise_sd"]
                ),
                detection_recall=_parse_float(
                    name, "detection_recall", parser[name]["detection_recall"]
                ),
                switch_latency_ms=_parse_float(
                    name, "switch_latency_ms", parser[name]["switch_latency_ms"]
                ),
                inference_time_ms=_parse_float(
                    name, "inference_time_ms", parser[name]["inference_time_ms"]
                ),
            )
            for name in model_sections
        )
    else:
        profiles = default_profiles()

    reserved = {"trace"} | set(segment_keys) | set(model_sections)
    extras = {
        name: dict(parser[name]) for name in parser.sections() if name not in reserved
    }
    trace = TraceConfig(fps=fps, duration_s=duration_s, segments=segments, rng_seed=rng_seed)
    return SimConfig(trace=trace, profiles=profiles, extras=extras)

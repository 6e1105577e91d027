"""Model-selection strategies.

Three planners share one interface: an epsilon-greedy policy over the
score table, a naive two-threshold policy, and round-robin over time
slices with periodic CPU-rank boosting. Each returns a SelectionDecision;
actually performing the switch is the executor's job.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Mapping, Sequence

from modelswitch.domain import (
    FrameMetrics,
    ModelId,
    SelectionDecision,
    SelectionMode,
    WindowAggregate,
)

DEFAULT_EPSILON = 0.1
DEFAULT_DECISION_PERIOD = 1
DEFAULT_CPU_HIGH_THRESHOLD = 17.5
DEFAULT_CONFIDENCE_LOW_THRESHOLD = 0.4
DEFAULT_TIME_SLICE_FRAMES = 40
DEFAULT_BOOST_PERIOD_FRAMES = 600


class EmptyRepository(Exception):
    """A decision was requested with no models to choose from."""


@dataclass(frozen=True)
class PlannerConfig:
    """Epsilon-greedy knobs."""

    epsilon: float = DEFAULT_EPSILON
    decision_period: int = DEFAULT_DECISION_PERIOD
    rng_seed: int = 0
    # With exclusion on, exploration never lands on the current best-scoring
    # model, so every explore step buys new information.
    exclude_best: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon out of range: {self.epsilon}")
        if self.decision_period < 1:
            raise ValueError(f"decision_period must be >= 1: {self.decision_period}")


@dataclass(frozen=True)
class NaiveConfig:
    """Thresholds for the naive baseline."""

    model_order: tuple[ModelId, ...]  # lightest to heaviest
    cpu_high_threshold: float = DEFAULT_CPU_HIGH_THRESHOLD
    confidence_low_threshold: float = DEFAULT_CONFIDENCE_LOW_THRESHOLD

    def __post_init__(self) -> None:
        if not self.model_order:
            raise EmptyRepository("model_order is empty")
        if len(set(self.model_order)) != len(self.model_order):
            raise ValueError(f"model_order has duplicates: {self.model_order}")
        if not 0.0 <= self.cpu_high_threshold <= 100.0:
            raise ValueError(f"cpu_high_threshold out of range: {self.cpu_high_threshold}")
        if not 0.0 <= self.confidence_low_threshold <= 1.0:
            raise ValueError(
                f"confidence_low_threshold out of range: {self.confidence_low_threshold}"
            )


@dataclass(frozen=True)
class RoundRobinBoostConfig:
    """Slice and recalibration cadence for round-robin with boosting."""

    time_slice_frames: int = DEFAULT_TIME_SLICE_FRAMES
    boost_period_frames: int = DEFAULT_BOOST_PERIOD_FRAMES

    def __post_init__(self) -> None:
        if self.time_slice_frames < 1:
            raise ValueError(f"time_slice_frames must be >= 1: {self.time_slice_frames}")
        if self.boost_period_frames < 1:
            raise ValueError(f"boost_period_frames must be >= 1: {self.boost_period_frames}")


@dataclass(frozen=True, slots=True)
class DecisionContext:
    """Everything the loop hands a strategy for one decision."""

    frame_index: int
    active: ModelId
    scores: Mapping[ModelId, float]
    latest: FrameMetrics | None  # most recent metrics of the active model
    cpu_rank: tuple[ModelId, ...]


def best_model(scores: Mapping[ModelId, float]) -> ModelId:
    """Minimum-score model; ties break toward the lexicographically first id."""
    if not scores:
        raise EmptyRepository("score table is empty")
    return min(scores, key=lambda m: (scores[m], m))


def select_epsilon_greedy(
    scores: Mapping[ModelId, float],
    active: ModelId,
    p: float,
    epsilon: float,
    rng: Random,
    exclude_best: bool = True,
) -> SelectionDecision:
    """One epsilon-greedy decision given an already-drawn p in [0, 1).

    p <= epsilon explores: a uniform pick over the repository, minus the
    current best scorer when exclusion is on. Otherwise (and when a lone
    model leaves nothing to explore) exploit the minimum score.
    """
    best = best_model(scores)
    if p <= epsilon:
        candidates = sorted(m for m in scores if m != best) if exclude_best else sorted(scores)
        if candidates:
            pick = candidates[rng.randrange(len(candidates))]
            return SelectionDecision(
                selected=pick, mode=SelectionMode.EXPLORE, random_draw=p, previous=active
            )
    return SelectionDecision(
        selected=best, mode=SelectionMode.EXPLOIT, random_draw=p, previous=active
    )


def select_naive(
    latest: FrameMetrics | None, config: NaiveConfig, active: ModelId
) -> SelectionDecision:
    """Two-threshold policy: step lighter on high CPU, heavier on low
    confidence, otherwise stay. Clamps at both ends of model_order."""
    order = config.model_order
    position = order.index(active)
    selected = active
    if latest is not None:
        if latest.cpu_usage > config.cpu_high_threshold:
            selected = order[max(position - 1, 0)]
        elif latest.confidence_score < config.confidence_low_threshold:
            selected = order[min(position + 1, len(order) - 1)]
    return SelectionDecision(
        selected=selected, mode=SelectionMode.FORCED, random_draw=None, previous=active
    )


def rank_models_by_cpu(
    model_ids: Sequence[ModelId], aggregates: Mapping[ModelId, WindowAggregate | None]
) -> tuple[ModelId, ...]:
    """Order models by observed average CPU, lightest first.

    Models without any window data go last, keeping their given order; the
    id breaks ties among observed models so the ranking is deterministic.
    """
    observed = [m for m in model_ids if aggregates.get(m) is not None]
    unobserved = [m for m in model_ids if aggregates.get(m) is None]
    observed.sort(key=lambda m: (aggregates[m].avg_cpu, m))
    return tuple(observed + unobserved)


class SelectionStrategy:
    """Common face of all planners."""

    name = "strategy"
    # When set, the loop refreshes the context's cpu_rank every this many
    # frames (used by round-robin boosting; None means never).
    rank_refresh_period: int | None = None

    def decide(self, ctx: DecisionContext) -> SelectionDecision:
        raise NotImplementedError


class EpsilonGreedyStrategy(SelectionStrategy):
    """Draws p once per decision and delegates to select_epsilon_greedy."""

    name = "epsilon-greedy"

    def __init__(self, config: PlannerConfig = PlannerConfig()):
        self.config = config
        self.rng = Random(config.rng_seed)

    def decide(self, ctx: DecisionContext) -> SelectionDecision:
        p = self.rng.random()
        return select_epsilon_greedy(
            ctx.scores, ctx.active, p, self.config.epsilon, self.rng, self.config.exclude_best
        )


class NaiveThresholdStrategy(SelectionStrategy):
    name = "naive"

    def __init__(self, config: NaiveConfig):
        self.config = config

    def decide(self, ctx: DecisionContext) -> SelectionDecision:
        return select_naive(ctx.latest, self.config, ctx.active)


class RoundRobinBoostStrategy(SelectionStrategy):
    """Advances through cpu_rank one step per elapsed time slice.

    The rank itself is refreshed by the loop every boost period (see
    rank_refresh_period); between refreshes it is deliberately stale.
    """

    name = "round-robin-boost"

    def __init__(self, config: RoundRobinBoostConfig = RoundRobinBoostConfig()):
        self.config = config
        self.rank_refresh_period = config.boost_period_frames
        self._slot = -1
        self._position = -1

    def decide(self, ctx: DecisionContext) -> SelectionDecision:
        if not ctx.cpu_rank:
            raise EmptyRepository("cpu_rank is empty")
        slot = ctx.frame_index // self.config.time_slice_frames
        if slot > self._slot:
            # A single step per observed boundary keeps the rotation order
            # even when a long switch swallows whole slices.
            self._position += 1
            self._slot = slot
        selected = ctx.cpu_rank[self._position % len(ctx.cpu_rank)]
        return SelectionDecision(
            selected=selected, mode=SelectionMode.FORCED, random_draw=None, previous=ctx.active
        )

"""Experiment runner and report generator.

``run`` drives one strategy over the simulated workload and leaves a run
directory with metrics.csv, events.csv and summary.txt (flat key=value).
``compare`` lines several completed runs up side by side and adds two
fairness figures (max usage share, normalized Shannon entropy).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from modelswitch.domain import SelectionMode
from modelswitch.executor import DEFAULT_CONFIDENCE_FLOOR
from modelswitch.knowledge import DecisionRecord, IoFailure, ModelRepository
from modelswitch.loop import LoopResult, run_loop
from modelswitch.monitor import DEFAULT_WINDOW_CAPACITY
from modelswitch.planner import (
    EpsilonGreedyStrategy,
    NaiveConfig,
    NaiveThresholdStrategy,
    PlannerConfig,
    RoundRobinBoostConfig,
    RoundRobinBoostStrategy,
    SelectionStrategy,
)
from modelswitch.sim import (
    DEFAULT_SEED,
    InvalidSchedule,
    SimConfig,
    TraceConfig,
    default_profiles,
    generate_trace,
    parse_config,
)

SUMMARY_FILENAME = "summary.txt"
STRATEGY_NAMES = ("epsilon-greedy", "naive", "round-robin-boost")

BATTERY_PLACEHOLDER = "n/a"


class UnknownStrategy(Exception):
    """Strategy name outside STRATEGY_NAMES."""


class ConfigError(Exception):
    """The experiment config could not be used."""


class MissingRun(Exception):
    """A run directory lacks the files of a completed run."""


@dataclass(frozen=True)
class RunSummary:
    """Aggregate outcome of one run, as written to summary.txt."""

    strategy: str
    seed: int
    frames_total: int
    frames_processed: int
    frames_dropped: int
    decision_count: int
    explore_count: int
    switch_count: int
    avg_cpu_pct: float
    avg_confidence_pct: float
    avg_switch_time_s: float
    cumulative_switch_time_s: float
    usage_counts: dict[str, int]
    usage_shares: dict[str, float]


def max_share(shares: dict[str, float]) -> float:
    """Largest usage share; 0.0 for an empty distribution."""
    return max(shares.values(), default=0.0)


def normalized_entropy(shares: dict[str, float]) -> float:
    """Shannon entropy of the usage distribution scaled to [0, 1].

    1.0 is perfectly even usage over all models, 0.0 is everything on one
    model. A single-model distribution is trivially even, so 1.0.
    """
    if len(shares) <= 1:
        return 1.0
    h = -sum(p * math.log(p) for p in shares.values() if p > 0.0)
    return h / math.log(len(shares))


def summarize(result: LoopResult, strategy: str, seed: int, model_ids: tuple[str, ...]) -> RunSummary:
    """Fold one run's registry into the reported aggregates."""
    records = result.registry.metrics_records
    processed = len(records)
    usage_counts = {m: 0 for m in model_ids}
    cpu_total = 0.0
    conf_total = 0.0
    for rec in records:
        usage_counts[rec.metrics.model] += 1
        cpu_total += rec.metrics.cpu_usage
        conf_total += rec.metrics.confidence_score
    usage_shares = {
        m: (count / processed if processed else 0.0) for m, count in usage_counts.items()
    }
    explore_count = sum(
        1
        for rec in result.registry.event_records
        if isinstance(rec, DecisionRecord) and rec.decision.mode is SelectionMode.EXPLORE
    )
    state = result.final_state
    return RunSummary(
        strategy=strategy,
        seed=seed,
        frames_total=result.frames_total,
        frames_processed=result.frames_processed,
        frames_dropped=result.frames_dropped,
        decision_count=result.decision_count,
        explore_count=explore_count,
        switch_count=state.switch_count,
        avg_cpu_pct=cpu_total / processed if processed else 0.0,
        avg_confidence_pct=100.0 * conf_total / processed if processed else 0.0,
        avg_switch_time_s=state.avg_switch_time_ms / 1000.0,
        cumulative_switch_time_s=state.cumulative_switch_time_ms / 1000.0,
        usage_counts=usage_counts,
        usage_shares=usage_shares,
    )


def write_summary(summary: RunSummary, path: Path) -> None:
    lines = [
        f"strategy={summary.strategy}",
        f"seed={summary.seed}",
        f"frames_total={summary.frames_total}",
        f"frames_processed={summary.frames_processed}",
        f"frames_dropped={summary.frames_dropped}",
        f"decision_count={summary.decision_count}",
        f"explore_count={summary.explore_count}",
        f"switch_count={summary.switch_count}",
        f"avg_cpu_pct={summary.avg_cpu_pct:.6f}",
        f"avg_confidence_pct={summary.avg_confidence_pct:.6f}",
        f"avg_switch_time_s={summary.avg_switch_time_s:.6f}",
        f"cumulative_switch_time_s={summary.cumulative_switch_time_s:.6f}",
    ]
    for model, count in summary.usage_counts.items():
        lines.append(f"usage_count.{model}={count}")
    for model, share in summary.usage_shares.items():
        lines.append(f"usage_share.{model}={share:.6f}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def read_summary(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise MissingRun(str(path))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    values: dict[str, str] = {}
    for line in lines:
        if not line:
            continue
        key, _, value = line.partition("=")
        values[key] = value
    return values


def _load_sim_config(config_path: str | None) -> SimConfig:
    if config_path is None:
        return SimConfig(trace=TraceConfig(), profiles=default_profiles(), extras={})
    try:
        return parse_config(config_path)
    except OSError as exc:
        raise IoFailure(config_path, exc) from exc
    except (InvalidSchedule, ValueError, KeyError) as exc:
        raise ConfigError(f"{config_path}: {exc}") from exc


def _get_float(extras: dict[str, dict[str, str]], section: str, key: str, fallback: float) -> float:
    raw = extras.get(section, {}).get(key)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from None


def _get_int(extras: dict[str, dict[str, str]], section: str, key: str, fallback: int) -> int:
    raw = extras.get(section, {}).get(key)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not an integer: {raw!r}") from None


def _get_bool(extras: dict[str, dict[str, str]], section: str, key: str, fallback: bool) -> bool:
    raw = extras.get(section, {}).get(key)
    if raw is None:
        return fallback
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: not a boolean: {raw!r}")


def build_strategy(
    name: str,
    repo: ModelRepository,
    extras: dict[str, dict[str, str]],
    seed: int,
    epsilon: float | None = None,
) -> tuple[SelectionStrategy, int]:
    """Construct the named strategy; returns it plus the decision period."""
    if name == "epsilon-greedy":
        try:
            config = PlannerConfig(
                epsilon=epsilon
                if epsilon is not None
                else _get_float(extras, "epsilon-greedy", "epsilon", PlannerConfig().epsilon),
                decision_period=_get_int(
                    extras, "epsilon-greedy", "decision_period", PlannerConfig().decision_period
                ),
                rng_seed=seed + 1,
                exclude_best=_get_bool(
                    extras, "epsilon-greedy", "exclude_best", PlannerConfig().exclude_best
                ),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return EpsilonGreedyStrategy(config), config.decision_period
    if name == "naive":
        raw_order = extras.get("naive", {}).get("model_order")
        if raw_order is None:
            order = repo.ids()
        else:
            order = tuple(part.strip() for part in raw_order.split(",") if part.strip())
        if sorted(order) != sorted(repo.ids()):
            raise ConfigError(f"model_order must permute the repository: {order}")
        defaults = NaiveConfig(model_order=order)
        try:
            config = NaiveConfig(
                model_order=order,
                cpu_high_threshold=_get_float(
                    extras, "naive", "cpu_high_threshold", defaults.cpu_high_threshold
                ),
                confidence_low_threshold=_get_float(
                    extras, "naive", "confidence_low_threshold", defaults.confidence_low_threshold
                ),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return NaiveThresholdStrategy(config), 1
    if name == "round-robin-boost":
        defaults = RoundRobinBoostConfig()
        try:
            config = RoundRobinBoostConfig(
                time_slice_frames=_get_int(
                    extras, "round-robin-boost", "time_slice_frames", defaults.time_slice_frames
                ),
                boost_period_frames=_get_int(
                    extras, "round-robin-boost", "boost_period_frames", defaults.boost_period_frames
                ),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return RoundRobinBoostStrategy(config), 1
    raise UnknownStrategy(name)


def run_experiment(
    strategy: str,
    out_dir: Path | str,
    config_path: str | None = None,
    seed: int | None = None,
    epsilon: float | None = None,
) -> RunSummary:
    """Run one strategy end to end; writes CSVs plus summary.txt to out_dir."""
    sim_config = _load_sim_config(config_path)
    effective_seed = seed if seed is not None else sim_config.trace.rng_seed
    try:
        trace_config = replace(sim_config.trace, rng_seed=effective_seed)
        repo = ModelRepository(sim_config.profiles)
    except (InvalidSchedule, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    planner, decision_period = build_strategy(
        strategy, repo, sim_config.extras, effective_seed, epsilon
    )
    window_capacity = _get_int(
        sim_config.extras, "engine", "window_capacity", DEFAULT_WINDOW_CAPACITY
    )
    confidence_floor = _get_float(
        sim_config.extras, "engine", "confidence_floor", DEFAULT_CONFIDENCE_FLOOR
    )
    trace = generate_trace(trace_config)
    result = run_loop(
        trace,
        repo,
        planner,
        fps=trace_config.fps,
        inference_seed=effective_seed + 2,
        decision_period=decision_period,
        window_capacity=window_capacity,
        confidence_floor=confidence_floor,
    )
    out = Path(out_dir)
    result.registry.export(out)
    summary = summarize(result, strategy, effective_seed, repo.ids())
    write_summary(summary, out / SUMMARY_FILENAME)
    return summary


def format_run_summary(summary: RunSummary) -> str:
    lines = [
        f"strategy:           {summary.strategy} (seed {summary.seed})",
        f"frames processed:   {summary.frames_processed} of {summary.frames_total}"
        f" ({summary.frames_dropped} dropped during switches)",
        f"decisions:          {summary.decision_count} ({summary.explore_count} explore)",
        f"switches:           {summary.switch_count}"
        f" (avg {summary.avg_switch_time_s:.3f} s per switch)",
        f"avg cpu:            {summary.avg_cpu_pct:.2f} %",
        f"avg confidence:     {summary.avg_confidence_pct:.2f} %",
        "usage shares:",
    ]
    for model, share in summary.usage_shares.items():
        lines.append(f"  {model:<24} {summary.usage_counts[model]:>8}  {share:7.2%}")
    return "\n".join(lines)


def compare(run_dirs: list[Path | str]) -> str:
    """Side-by-side report over completed runs; row order is deterministic."""
    if len(run_dirs) < 2:
        raise ConfigError("compare needs at least two run directories")
    rows = []
    for run_dir in run_dirs:
        values = read_summary(Path(run_dir) / SUMMARY_FILENAME)
        try:
            rows.append(
                {
                    "label": values["strategy"],
                    "seed": int(values["seed"]),
                    "frames": int(values["frames_processed"]),
                    "cpu": float(values["avg_cpu_pct"]),
                    "accuracy": float(values["avg_confidence_pct"]),
                    "switch_s": float(values["avg_switch_time_s"]),
                    "shares": {
                        key.split(".", 1)[1]: float(val)
                        for key, val in values.items()
                        if key.startswith("usage_share.")
                    },
                }
            )
        except (KeyError, ValueError) as exc:
            raise MissingRun(f"{run_dir}: incomplete summary ({exc})") from exc
    rows.sort(key=lambda r: (r["label"], r["seed"]))

    header = (
        "approach",
        "frames processed",
        "avg cpu (%)",
        "avg accuracy (%)",
        "avg switch time (s)",
        "battery (mAh)",
    )
    table = [header]
    for row in rows:
        table.append(
            (
                row["label"],
                str(row["frames"]),
                f"{row['cpu']:.2f}",
                f"{row['accuracy']:.2f}",
                f"{row['switch_s']:.3f}",
                BATTERY_PLACEHOLDER,
            )
        )
    widths = [max(len(line[col]) for line in table) for col in range(len(header))]
    rendered = []
    for line in table:
        rendered.append("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
    rendered.append("")
    rendered.append("fairness (usage distribution):")
    for row in rows:
        rendered.append(
            f"  {row['label']:<20} max-share={max_share(row['shares']):.4f}"
            f"  entropy={normalized_entropy(row['shares']):.4f}"
        )
    return "\n".join(rendered)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="modelswitch",
        description="Adaptive model switching over a simulated inference workload.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run one strategy and write a run directory")
    run_parser.add_argument("--strategy", required=True, choices=STRATEGY_NAMES)
    run_parser.add_argument("--config", default=None, help="INI experiment config")
    run_parser.add_argument("--seed", type=int, default=None, help=f"default {DEFAULT_SEED}")
    run_parser.add_argument("--epsilon", type=float, default=None)
    run_parser.add_argument("--out", required=True, help="run output directory")

    cmp_parser = sub.add_parser("compare", help="compare completed run directories")
    cmp_parser.add_argument("run_dirs", nargs="+", help="at least two run directories")
    cmp_parser.add_argument("--out", default=None, help="also write the report here")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            summary = run_experiment(
                args.strategy,
                args.out,
                config_path=args.config,
                seed=args.seed,
                epsilon=args.epsilon,
            )
            print(format_run_summary(summary))
        else:
            report = compare(args.run_dirs)
            print(report)
            if args.out:
                try:
                    with open(args.out, "w", encoding="utf-8", newline="") as fh:
                        fh.write(report + "\n")
                except OSError as exc:
                    raise IoFailure(args.out, exc) from exc
        return 0
    except (ConfigError, UnknownStrategy, InvalidSchedule) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (IoFailure, MissingRun, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

from __future__ import annotations

import statistics
from pathlib import Path

import pytest

from modelswitch.cli import (
    STRATEGY_NAMES,
    SUMMARY_FILENAME,
    ConfigError,
    MissingRun,
    UnknownStrategy,
    build_strategy,
    compare,
    main,
    max_share,
    normalized_entropy,
    read_summary,
    run_experiment,
    write_summary,
)
from modelswitch.knowledge import (
    EVENTS_FILENAME,
    METRICS_FILENAME,
    ModelRepository,
    load_events_csv,
    load_metrics_csv,
)
from modelswitch.planner import (
    EpsilonGreedyStrategy,
    NaiveThresholdStrategy,
    RoundRobinBoostStrategy,
)
from modelswitch.sim import default_profiles

SMALL_CONFIG = """\
[trace]
fps = 20
duration_s = 45
rng_seed = 5

[segment.1]
start_s = 0
mean_objects = 3
complexity = 0.1

[segment.2]
start_s = 15
mean_objects = 10
complexity = 0.6

[segment.3]
start_s = 30
mean_objects = 3
complexity = 0.1
"""


@pytest.fixture()
def small_config(tmp_path) -> str:
    path = tmp_path / "small.ini"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return str(path)


def _repo() -> ModelRepository:
    return ModelRepository(default_profiles())


def test_max_share_and_entropy_edges() -> None:
    assert max_share({}) == 0.0
    assert max_share({"a": 0.7, "b": 0.3}) == 0.7
    assert normalized_entropy({"a": 1.0}) == 1.0
    assert normalized_entropy({"a": 1.0, "b": 0.0}) == 0.0
    even = {"a": 0.25, "b": 0.25, "c": 0.25, "d": 0.25}
    assert normalized_entropy(even) == pytest.approx(1.0)


def test_build_strategy_constructs_each_kind() -> None:
    repo = _repo()
    strategy, period = build_strategy("epsilon-greedy", repo, {}, seed=3)
    assert isinstance(strategy, EpsilonGreedyStrategy)
    assert period == 1
    strategy, _ = build_strategy("naive", repo, {}, seed=3)
    assert isinstance(strategy, NaiveThresholdStrategy)
    assert strategy.config.model_order == repo.ids()
    strategy, _ = build_strategy("round-robin-boost", repo, {}, seed=3)
    assert isinstance(strategy, RoundRobinBoostStrategy)


def test_build_strategy_rejects_unknown_name() -> None:
    with pytest.raises(UnknownStrategy):
        build_strategy("simulated-annealing", _repo(), {}, seed=0)


def test_build_strategy_epsilon_argument_wins_over_config() -> None:
    extras = {"epsilon-greedy": {"epsilon": "0.5"}}
    strategy, _ = build_strategy("epsilon-greedy", _repo(), extras, seed=0, epsilon=0.25)
    assert isinstance(strategy, EpsilonGreedyStrategy)
    assert strategy.config.epsilon == 0.25
    strategy, _ = build_strategy("epsilon-greedy", _repo(), extras, seed=0)
    assert strategy.config.epsilon == 0.5


def test_build_strategy_rejects_bad_extras() -> None:
    with pytest.raises(ConfigError):
        build_strategy("epsilon-greedy", _repo(), {"epsilon-greedy": {"epsilon": "lots"}}, seed=0)
    with pytest.raises(ConfigError):
        build_strategy("naive", _repo(), {"naive": {"model_order": "a,b"}}, seed=0)
    with pytest.raises(ConfigError):
        build_strategy("epsilon-greedy", _repo(), {"epsilon-greedy": {"epsilon": "7"}}, seed=0)


def test_run_experiment_writes_a_complete_run_directory(small_config, tmp_path) -> None:
    out = tmp_path / "run"
    summary = run_experiment("epsilon-greedy", out, config_path=small_config)
    assert (out / METRICS_FILENAME).is_file()
    assert (out / EVENTS_FILENAME).is_file()
    assert (out / SUMMARY_FILENAME).is_file()
    assert summary.seed == 5  # the config's rng_seed
    assert summary.frames_total == 900


def test_run_summary_is_consistent_with_the_csv_files(small_config, tmp_path) -> None:
    out = tmp_path / "run"
    summary = run_experiment("epsilon-greedy", out, config_path=small_config)

    rows = load_metrics_csv(out / METRICS_FILENAME)
    assert len(rows) == summary.frames_processed
    assert sum(summary.usage_counts.values()) == summary.frames_processed
    cpu_mean = statistics.fmean(m.cpu_usage for _, m in rows)
    conf_mean = statistics.fmean(m.confidence_score for _, m in rows)
    # The CSV stores 4-decimal values, so allow a rounding-sized gap.
    assert cpu_mean == pytest.approx(summary.avg_cpu_pct, abs=1e-3)
    assert 100.0 * conf_mean == pytest.approx(summary.avg_confidence_pct, abs=1e-1)

    events = load_events_csv(out / EVENTS_FILENAME)
    switches = [e for e in events if e["event_type"] == "switch"]
    explores = [e for e in events if e["mode"] == "explore"]
    decisions = [e for e in events if e["event_type"] == "decision"]
    assert len(switches) == summary.switch_count
    assert len(explores) == summary.explore_count
    assert len(decisions) == summary.decision_count


def test_run_experiment_is_deterministic(small_config, tmp_path) -> None:
    first = tmp_path / "first"
    second = tmp_path / "second"
    run_experiment("round-robin-boost", first, config_path=small_config)
    run_experiment("round-robin-boost", second, config_path=small_config)
    assert (first / METRICS_FILENAME).read_bytes() == (second / METRICS_FILENAME).read_bytes()
    assert (first / EVENTS_FILENAME).read_bytes() == (second / EVENTS_FILENAME).read_bytes()


def test_run_experiment_seed_overrides_config(small_config, tmp_path) -> None:
    base = tmp_path / "base"
    reseeded = tmp_path / "reseeded"
    run_experiment("epsilon-greedy", base, config_path=small_config)
    summary = run_experiment("epsilon-greedy", reseeded, config_path=small_config, seed=99)
    assert summary.seed == 99
    assert (base / METRICS_FILENAME).read_bytes() != (reseeded / METRICS_FILENAME).read_bytes()


def test_zero_epsilon_run_never_explores(small_config, tmp_path) -> None:
    summary = run_experiment(
        "epsilon-greedy", tmp_path / "run", config_path=small_config, epsilon=0.0
    )
    assert summary.explore_count == 0


def test_summary_file_round_trip(small_config, tmp_path) -> None:
    out = tmp_path / "run"
    summary = run_experiment("naive", out, config_path=small_config)
    values = read_summary(out / SUMMARY_FILENAME)
    assert values["strategy"] == "naive"
    assert int(values["frames_processed"]) == summary.frames_processed
    assert float(values["avg_switch_time_s"]) == pytest.approx(
        summary.avg_switch_time_s, abs=1e-6
    )
    share_keys = [k for k in values if k.startswith("usage_share.")]
    assert len(share_keys) == len(summary.usage_shares)

    rewritten = tmp_path / "copy.txt"
    write_summary(summary, rewritten)
    assert rewritten.read_text(encoding="utf-8") == (out / SUMMARY_FILENAME).read_text(
        encoding="utf-8"
    )


def test_compare_lists_runs_in_stable_order(small_config, tmp_path) -> None:
    dirs = []
    for name in STRATEGY_NAMES:
        out = tmp_path / name
        run_experiment(name, out, config_path=small_config)
        dirs.append(out)

    report = compare(list(dirs))
    assert "approach" in report and "battery (mAh)" in report
    assert "n/a" in report
    assert "fairness (usage distribution):" in report
    for name in STRATEGY_NAMES:
        assert name in report
    # Row order comes from the summaries, not the argument order.
    assert report == compare(list(reversed(dirs)))
    lines = report.splitlines()
    assert lines[1].startswith("epsilon-greedy")
    assert lines[2].startswith("naive")
    assert lines[3].startswith("round-robin-boost")


def test_compare_needs_at_least_two_runs(tmp_path) -> None:
    with pytest.raises(ConfigError):
        compare([tmp_path])


def test_compare_rejects_missing_or_incomplete_runs(small_config, tmp_path) -> None:
    done = tmp_path / "done"
    run_experiment("naive", done, config_path=small_config)
    with pytest.raises(MissingRun):
        compare([done, tmp_path / "never-ran"])

    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / SUMMARY_FILENAME).write_text("strategy=naive\n", encoding="utf-8")
    with pytest.raises(MissingRun):
        compare([done, broken])


def test_main_run_and_compare_round_trip(small_config, tmp_path, capsys) -> None:
    first = tmp_path / "eps"
    second = tmp_path / "naive"
    assert main(["run", "--strategy", "epsilon-greedy", "--config", small_config,
                 "--out", str(first)]) == 0
    assert main(["run", "--strategy", "naive", "--config", small_config,
                 "--out", str(second)]) == 0
    out = capsys.readouterr().out
    assert "strategy:" in out and "usage shares:" in out

    report_path = tmp_path / "report.txt"
    assert main(["compare", str(first), str(second), "--out", str(report_path)]) == 0
    printed = capsys.readouterr().out
    assert "fairness (usage distribution):" in printed
    assert report_path.read_text(encoding="utf-8").rstrip("\n") in printed


def test_main_reports_config_errors_as_exit_one(tmp_path) -> None:
    bad = tmp_path / "bad.ini"
    bad.write_text(
        "[trace]\nduration_s = 10\n"
        "[segment.1]\nstart_s = 50\nmean_objects = 1\ncomplexity = 0.1\n",
        encoding="utf-8",
    )
    code = main(
        ["run", "--strategy", "naive", "--config", str(bad), "--out", str(tmp_path / "out")]
    )
    assert code == 1


def test_main_reports_io_errors_as_exit_two(tmp_path) -> None:
    code = main(
        [
            "run",
            "--strategy",
            "naive",
            "--config",
            str(tmp_path / "missing.ini"),
            "--out",
            str(tmp_path / "out"),
        ]
    )
    assert code == 2
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b")]) == 2

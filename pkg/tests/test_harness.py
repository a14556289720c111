"""Experiment harness tests: config files, CSV metrics, reproducibility,
step accounting, and curve aggregation against reference statistics."""
import math

import numpy as np
import pytest

import gridlang.agent
import gridlang.harness
from gridlang.harness import (
    METRICS_HEADER,
    ConfigFileError,
    CurvePoint,
    ExperimentConfig,
    aggregate_curves,
    read_config,
    read_metrics,
    run_experiment,
    run_oracle,
    write_aggregate,
    write_config,
    write_metrics,
)


def small_config(**overrides):
    base = dict(
        experiment="exp_a_162",
        model="oracle_mock",
        seeds=(0,),
        eval_every_steps=200,
        eval_episodes=3,
        total_step_budget=600,
        verify_rollouts=5,
        grid_size=6,
        n_distractors=2,
        step_limit=50,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfigFile:
    def test_round_trip(self, tmp_path):
        config = small_config(seeds=(0, 1, 2), noise_rate=0.1)
        path = tmp_path / "config.json"
        write_config(config, str(path))
        assert read_config(str(path)) == config

    def test_unknown_key_named_in_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"experiment": "oracle", "bogus_knob": 3}')
        with pytest.raises(ConfigFileError, match="bogus_knob"):
            read_config(str(path))

    def test_invalid_budgets_rejected(self):
        with pytest.raises(ConfigFileError):
            ExperimentConfig(total_step_budget=-1)
        with pytest.raises(ConfigFileError):
            ExperimentConfig(eval_every_steps=0)
        with pytest.raises(ConfigFileError):
            ExperimentConfig(eval_every_steps=10_000, total_step_budget=5_000)

    def test_env_and_agent_views(self):
        config = small_config(beam_width=4, accept_threshold=0.8)
        assert config.env_config().grid_size == 6
        assert config.agent_config().beam_width == 4
        assert config.agent_config().accept_threshold == 0.8

    def test_unknown_experiment_and_model_rejected(self):
        with pytest.raises(ConfigFileError):
            run_experiment(small_config(experiment="exp_z"))
        with pytest.raises(ConfigFileError):
            run_experiment(small_config(model="psychic", total_step_budget=0))


class TestMetricsCsv:
    def test_header_and_round_trip(self, tmp_path):
        points = [
            CurvePoint(0, 0.0, 0, "train", 0),
            CurvePoint(5000, 0.92, 17, "test", 3),
        ]
        path = tmp_path / "metrics.csv"
        write_metrics(points, str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == ",".join(METRICS_HEADER)
        assert lines[0] == "env_steps,mean_success,tasks_solved,split,seed"
        assert read_metrics(str(path)) == points

    def test_byte_identical_reruns(self, tmp_path):
        config = small_config()
        for name in ("a.csv", "b.csv"):
            write_metrics(run_experiment(config), str(tmp_path / name))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestLearnLoop:
    def test_zero_budget_emits_single_init_point(self):
        config = small_config(total_step_budget=0, eval_every_steps=1)
        points = run_experiment(config)
        assert len(points) == 1
        assert points[0].env_steps == 0
        assert points[0].tasks_solved == 0

    def test_pretrain_offset_shifts_all_env_steps(self):
        config = small_config(pretrain_step_offset=40_000)
        points = run_experiment(config)
        assert all(p.env_steps >= 40_000 for p in points)
        assert points[0].env_steps == 40_000

    def test_curves_cover_the_budget(self):
        config = small_config()
        points = run_experiment(config)
        assert points[-1].env_steps >= config.total_step_budget
        steps = [p.env_steps for p in points]
        assert steps == sorted(steps)

    def test_step_accounting_audit(self, monkeypatch):
        # every environment step charged to the curve must come from a real
        # verification episode: sum of per-attempt step costs == final
        # env_steps - offset, and each attempt's cost is the sum of its
        # rollout episode lengths
        reports = []
        config = small_config(pretrain_step_offset=1234)
        points = gridlang.harness.run_exp_a(config, seed=0, report_sink=reports.append)
        assert sum(r.env_steps for r in reports) == points[-1].env_steps - 1234
        for r in reports:
            assert r.env_steps == sum(
                sum(v.episode_lengths) for v in r.verdicts
            )

    def test_exp_b_emits_train_and_test_points(self):
        config = small_config(experiment="exp_b_split")
        points = run_experiment(config)
        assert {p.split for p in points} == {"train", "test"}
        n_train = sum(1 for p in points if p.split == "train")
        n_test = sum(1 for p in points if p.split == "test")
        assert n_train == n_test

    def test_multiple_seeds_tagged(self):
        config = small_config(seeds=(0, 1), total_step_budget=200)
        points = run_experiment(config)
        assert {p.seed for p in points} == {0, 1}


class TestOracleRunner:
    def test_one_point_per_task_and_high_success(self):
        config = small_config(experiment="oracle", eval_episodes=2)
        points = run_oracle(config, seed=0)
        assert len(points) == 162
        solved = [p.tasks_solved for p in points]
        assert solved == sorted(solved)
        assert solved[-1] >= 155
        mean = np.mean([p.mean_success for p in points])
        assert mean >= 0.95


class TestAggregation:
    def test_matches_reference_statistics(self):
        points = [
            CurvePoint(0, 0.2, 0, "all", 0),
            CurvePoint(100, 0.6, 1, "all", 0),
            CurvePoint(0, 0.4, 0, "all", 1),
            CurvePoint(110, 0.8, 2, "all", 1),
        ]
        rows = aggregate_curves(points)
        assert len(rows) == 2
        tick1 = rows[1]
        values = np.array([0.6, 0.8])
        assert tick1["success_mean"] == pytest.approx(values.mean())
        expected_ci = 1.96 * values.std(ddof=1) / math.sqrt(2)
        assert tick1["success_ci95"] == pytest.approx(expected_ci)
        assert tick1["env_steps_mean"] == pytest.approx(105.0)
        assert tick1["n_seeds"] == 2

    def test_single_seed_has_zero_ci(self):
        points = [CurvePoint(0, 0.5, 0, "all", 0)]
        rows = aggregate_curves(points)
        assert rows[0]["success_ci95"] == 0.0

    def test_ragged_series_truncated_to_common_ticks(self):
        points = [
            CurvePoint(0, 0.1, 0, "all", 0),
            CurvePoint(100, 0.2, 0, "all", 0),
            CurvePoint(0, 0.3, 0, "all", 1),
        ]
        rows = aggregate_curves(points)
        assert len(rows) == 1

    def test_write_aggregate_format(self, tmp_path):
        rows = aggregate_curves(
            [CurvePoint(0, 0.25, 0, "all", 0), CurvePoint(0, 0.75, 0, "all", 1)]
        )
        path = tmp_path / "agg.csv"
        write_aggregate(rows, str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "split,tick,env_steps_mean,success_mean,success_ci95,n_seeds"
        assert lines[1].startswith("all,0,0.00,0.500000,")

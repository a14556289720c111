"""Experiment harness: seeded runs, learning curves, CSV metrics."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .agent import Agent, AgentConfig
from .boolexpr import SymbolMap, to_text
from .chat import ChatModel, HeuristicMock, HttpChatModel, OracleMock
from .compose import rollout_success
from .env import EnvConfig
from .tasks import TaskSpec, generate_tasks, sample_task, split_tasks


class ConfigFileError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "exp_a_162"      # exp_a_162 | exp_b_split | oracle
    model: str = "oracle_mock"         # oracle_mock | heuristic_mock | remote
    seeds: tuple[int, ...] = (0,)
    eval_every_steps: int = 5_000
    eval_episodes: int = 100
    total_step_budget: int = 200_000
    pretrain_step_offset: int = 0
    noise_rate: float = 0.0
    remote_model_name: str = "gpt-4"
    beam_width: int = 10
    retrieval_k: int = 10
    verify_rollouts: int = 100
    accept_threshold: float = 0.92
    grid_size: int = 8
    n_distractors: int = 4
    step_limit: int = 100

    def __post_init__(self):
        if self.total_step_budget < 0 or self.eval_every_steps <= 0:
            raise ConfigFileError("budgets must be positive")
        if self.eval_every_steps > max(self.total_step_budget, 1):
            raise ConfigFileError("eval cadence exceeds the step budget")

    def env_config(self) -> EnvConfig:
        return EnvConfig(
            grid_size=self.grid_size,
            n_distractors=self.n_distractors,
            step_limit=self.step_limit,
        )

    def agent_config(self) -> AgentConfig:
        return AgentConfig(
            beam_width=self.beam_width,
            retrieval_k=self.retrieval_k,
            verify_rollouts=self.verify_rollouts,
            accept_threshold=self.accept_threshold,
        )


def read_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        doc = json.load(f)
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key in doc:
        if key not in known:
            raise ConfigFileError(f"unknown config key: {key!r}")
    if "seeds" in doc:
        doc["seeds"] = tuple(doc["seeds"])
    return ExperimentConfig(**doc)


def write_config(config: ExperimentConfig, path: str) -> None:
    doc = dataclasses.asdict(config)
    doc["seeds"] = list(doc["seeds"])
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)


@dataclass(frozen=True)
class CurvePoint:
    env_steps: int
    mean_success: float
    tasks_solved: int
    split: str  # train | test | all
    seed: int


def _make_model(
    config: ExperimentConfig,
    suite: list[TaskSpec],
    symbol_map: SymbolMap,
    rng: np.random.Generator,
) -> ChatModel:
    if config.model == "oracle_mock":
        truth = {t.instruction: to_text(t.truth_expr) for t in suite}
        return OracleMock(
            truth, noise_rate=config.noise_rate, rng=rng, symbol_map=symbol_map
        )
    if config.model == "heuristic_mock":
        return HeuristicMock(symbol_map, rng=rng)
    if config.model == "remote":
        return HttpChatModel(config.remote_model_name)
    raise ConfigFileError(f"unknown model kind: {config.model!r}")


def _run_learn_loop(
    config: ExperimentConfig,
    seed: int,
    learn_tasks,
    eval_sets: list[tuple[str, list[TaskSpec]]],
    agent: Agent,
    rng: np.random.Generator,
    report_sink: Optional[Callable] = None,
) -> list[CurvePoint]:
    if not learn_tasks:
        raise ConfigFileError("learning task set must be nonempty")
    offset = config.pretrain_step_offset
    points = []

    def emit_eval() -> None:
        for split, tasks in eval_sets:
            task = sample_task(tasks, rng)
            rate, _ = agent.eval_task(task, config.eval_episodes, rng)
            points.append(
                CurvePoint(
                    env_steps=offset + agent.env_steps_consumed,
                    mean_success=rate,
                    tasks_solved=agent.tasks_solved,
                    split=split,
                    seed=seed,
                )
            )

    emit_eval()  # initialization point at the pretraining offset
    if config.total_step_budget == 0:
        return points
    next_eval = config.eval_every_steps
    while agent.env_steps_consumed < config.total_step_budget:
        task = sample_task(learn_tasks, rng)
        report = agent.learn_step(task, rng)
        if report_sink is not None:
            report_sink(report)
        if agent.env_steps_consumed >= next_eval:
            emit_eval()
            while next_eval <= agent.env_steps_consumed:
                next_eval += config.eval_every_steps
    emit_eval()  # final point after budget exhaustion
    return points


def run_exp_a(
    config: ExperimentConfig, seed: int, report_sink: Optional[Callable] = None
) -> list[CurvePoint]:
    """All 162 tasks learned simultaneously; one random-task eval per tick."""
    rng = np.random.default_rng(seed)
    symbol_map = SymbolMap.random(rng)
    suite = generate_tasks(symbol_map)
    model = _make_model(config, suite, symbol_map, rng)
    agent = Agent(model, symbol_map, config.env_config(), config.agent_config())
    return _run_learn_loop(
        config, seed, suite, [("all", suite)], agent, rng, report_sink
    )


def run_exp_b(
    config: ExperimentConfig, seed: int, report_sink: Optional[Callable] = None
) -> list[CurvePoint]:
    """Learn on a random half of the suite; evaluate one train and one
    held-out task per tick."""
    rng = np.random.default_rng(seed)
    symbol_map = SymbolMap.random(rng)
    suite = generate_tasks(symbol_map)
    split = split_tasks(suite, seed)
    model = _make_model(config, suite, symbol_map, rng)
    agent = Agent(model, symbol_map, config.env_config(), config.agent_config())
    return _run_learn_loop(
        config,
        seed,
        list(split.train),
        [("train", list(split.train)), ("test", list(split.test))],
        agent,
        rng,
        report_sink,
    )


def run_oracle(config: ExperimentConfig, seed: int) -> list[CurvePoint]:
    """Ground-truth expressions composed directly; every task evaluated."""
    rng = np.random.default_rng(seed)
    symbol_map = SymbolMap.random(rng)
    suite = generate_tasks(symbol_map)
    env_config = config.env_config()
    order = rng.permutation(len(suite))
    points = []
    env_steps = config.pretrain_step_offset
    solved = 0
    for i in order:
        task = suite[i]
        verdict = rollout_success(
            task.truth_expr,
            task.denotation,
            symbol_map,
            config.eval_episodes,
            env_config,
            rng,
        )
        env_steps += verdict.env_steps
        if verdict.success_rate >= config.accept_threshold:
            solved += 1
        points.append(
            CurvePoint(
                env_steps=env_steps,
                mean_success=verdict.success_rate,
                tasks_solved=solved,
                split="all",
                seed=seed,
            )
        )
    return points


_RUNNERS = {
    "exp_a_162": run_exp_a,
    "exp_b_split": run_exp_b,
    "oracle": run_oracle,
}


def run_experiment(config: ExperimentConfig) -> list[CurvePoint]:
    if config.experiment not in _RUNNERS:
        raise ConfigFileError(f"unknown experiment: {config.experiment!r}")
    runner = _RUNNERS[config.experiment]
    points = []
    for seed in config.seeds:
        points.extend(runner(config, seed))
    return points


# ---------------------------------------------------------------------------
# Metrics files


METRICS_HEADER = ["env_steps", "mean_success", "tasks_solved", "split", "seed"]


def write_metrics(points: list[CurvePoint], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_HEADER)
        for p in points:
            writer.writerow(
                [p.env_steps, f"{p.mean_success:.6f}", p.tasks_solved, p.split, p.seed]
            )


def read_metrics(path: str) -> list[CurvePoint]:
    points = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            points.append(
                CurvePoint(
                    env_steps=int(row["env_steps"]),
                    mean_success=float(row["mean_success"]),
                    tasks_solved=int(row["tasks_solved"]),
                    split=row["split"],
                    seed=int(row["seed"]),
                )
            )
    return points


def aggregate_curves(points: list[CurvePoint]) -> list[dict]:
    """Mean and 95% CI over seeds, aligned by eval-tick index per split."""
    by_seed_split: dict[tuple[int, str], list[CurvePoint]] = {}
    for p in points:
        by_seed_split.setdefault((p.seed, p.split), []).append(p)
    splits = sorted({s for _, s in by_seed_split})
    rows = []
    for split in splits:
        series = [v for (seed, s), v in sorted(by_seed_split.items()) if s == split]
        n_ticks = min(len(s) for s in series)
        for tick in range(n_ticks):
            values = np.array([s[tick].mean_success for s in series])
            steps = np.array([s[tick].env_steps for s in series])
            n = len(values)
            mean = float(values.mean())
            if n > 1:
                ci = 1.96 * float(values.std(ddof=1)) / math.sqrt(n)
            else:
                ci = 0.0
            rows.append(
                {
                    "split": split,
                    "tick": tick,
                    "env_steps_mean": float(steps.mean()),
                    "success_mean": mean,
                    "success_ci95": ci,
                    "n_seeds": n,
                }
            )
    return rows


def write_aggregate(rows: list[dict], path: str) -> None:
    fields = ["split", "tick", "env_steps_mean", "success_mean", "success_ci95", "n_seeds"]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            out["env_steps_mean"] = f"{row['env_steps_mean']:.2f}"
            out["success_mean"] = f"{row['success_mean']:.6f}"
            out["success_ci95"] = f"{row['success_ci95']:.6f}"
            writer.writerow(out)

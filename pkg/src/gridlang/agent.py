"""The propose -> verify -> retain learning loop around the chat model."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boolexpr import ExprSyntaxError, SymbolMap, expr_length, parse, to_text
from .chat import ChatModel, TransportError, build_prompt
from .compose import INVALID, Verdict, rollout_success
from .env import EnvConfig
from .retrieval import ExampleStore, InContextExample
from .tasks import TaskSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentConfig:
    beam_width: int = 10
    retrieval_k: int = 10
    verify_rollouts: int = 100
    accept_threshold: float = 0.92
    train_temperature: float = 1.0
    eval_temperature: float = 0.0
    verify_all: bool = False        # verify every candidate, then pick in beam order
    resample_layouts: bool = True   # fresh layout per verification rollout


@dataclass(frozen=True)
class StepReport:
    task_id: str
    instruction: str
    candidates: tuple[str, ...]
    verdicts: tuple[Verdict, ...]
    retained: Optional[str]
    env_steps: int


class Agent:
    def __init__(
        self,
        model: ChatModel,
        symbol_map: SymbolMap,
        env_config: EnvConfig,
        config: AgentConfig = AgentConfig(),
        store: Optional[ExampleStore] = None,
    ):
        self.model = model
        self.symbol_map = symbol_map
        self.env_config = env_config
        self.config = config
        self.store = store if store is not None else ExampleStore()
        self.env_steps_consumed = 0

    @property
    def tasks_solved(self) -> int:
        return len(self.store)

    def propose(self, instruction: str, mode: str) -> tuple[list[str], object]:
        """Retrieve examples, build the prompt, sample candidates.

        Train mode: beam_width candidates at the training temperature.
        Eval mode: one candidate at the evaluation temperature.
        Transport failure degrades to an empty candidate list.
        """
        examples = self.store.retrieve(instruction, self.config.retrieval_k)
        prompt = build_prompt(instruction, examples)
        if mode == "train":
            n, temp = self.config.beam_width, self.config.train_temperature
        elif mode == "eval":
            n, temp = 1, self.config.eval_temperature
        else:
            raise ValueError(f"unknown mode: {mode}")
        try:
            candidates = self.model.complete(prompt, n, temp)
        except TransportError as exc:
            log.warning("chat model unavailable, skipping attempt: %s", exc)
            candidates = []
        return candidates, prompt

    def _verify(self, candidate: str, task: TaskSpec, rng: np.random.Generator) -> Verdict:
        try:
            expr = parse(candidate)
        except ExprSyntaxError:
            return INVALID
        return rollout_success(
            expr,
            task.denotation,
            self.symbol_map,
            self.config.verify_rollouts,
            self.env_config,
            rng,
            resample_layouts=self.config.resample_layouts,
        )

    def _retain(self, instruction: str, candidate: str) -> str:
        """Length-regularized retention: shorter expression wins, incumbent
        wins ties. Returns the expression now stored."""
        expr = parse(candidate)
        canonical = to_text(expr)
        length = expr_length(expr)
        incumbent = self.store.get(instruction)
        if incumbent is None or length < incumbent.token_length:
            self.store.add(InContextExample(instruction, canonical, length))
            return canonical
        return incumbent.expression

    def learn_step(self, task: TaskSpec, rng: np.random.Generator) -> StepReport:
        candidates, _ = self.propose(task.instruction, "train")
        # dedupe within the beam before spending rollouts, preserving order
        seen: dict[str, None] = {}
        for c in candidates:
            seen.setdefault(c)
        unique = list(seen)

        verdicts: dict[str, Verdict] = {}
        accepted: Optional[str] = None
        for candidate in unique:
            verdicts[candidate] = self._verify(candidate, task, rng)
            v = verdicts[candidate]
            if (
                accepted is None
                and v.kind == "evaluated"
                and v.success_rate >= self.config.accept_threshold
            ):
                accepted = candidate
                if not self.config.verify_all:
                    break

        retained = self._retain(task.instruction, accepted) if accepted else None
        ordered_verdicts = tuple(verdicts[c] for c in unique if c in verdicts)
        env_steps = sum(v.env_steps for v in ordered_verdicts)
        self.env_steps_consumed += env_steps
        return StepReport(
            task_id=task.task_id,
            instruction=task.instruction,
            candidates=tuple(c for c in unique if c in verdicts),
            verdicts=ordered_verdicts,
            retained=retained,
            env_steps=env_steps,
        )

    def eval_task(
        self, task: TaskSpec, n_episodes: int, rng: np.random.Generator
    ) -> tuple[float, int]:
        """Greedy proposal, composed and rolled out. Returns (rate, steps).

        Evaluation episodes are not charged to `env_steps_consumed`; the
        learning curve's x axis counts training interaction only.
        """
        candidates, _ = self.propose(task.instruction, "eval")
        if not candidates:
            return 0.0, 0
        try:
            expr = parse(candidates[0])
        except ExprSyntaxError:
            return 0.0, 0
        verdict = rollout_success(
            expr,
            task.denotation,
            self.symbol_map,
            n_episodes,
            self.env_config,
            rng,
        )
        return verdict.success_rate, verdict.env_steps

"""Boolean composition of WVFs and rollout-based verification.

Conjunction is pointwise min, disjunction pointwise max, and negation is
(q_max + q_min) - q, all evaluated at the same (state, goal, action).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import env as envmod
from .boolexpr import And, BoolExpr, Not, SymbolMap, Var
from .env import Action, EnvConfig, EpisodeState
from .objects import ObjectSpec
from .wvf import (
    BasisWVF,
    MinMaxPair,
    WVF,
    attribute_mask,
    min_max_for_layout,
    randomize_agent,
)


class CompositeWVF(WVF):
    """Pointwise min/max/affine composition of basis WVFs."""

    def __init__(self, expr: BoolExpr, pair: MinMaxPair, symbol_masks: np.ndarray):
        self.expr = expr
        self.pair = pair
        self.symbol_masks = symbol_masks  # (9, 18) bool
        self.backend = pair.q_max.backend

    def values(self, state: EpisodeState) -> np.ndarray:
        q_min, q_max = self.pair.matrices(state)
        return self._eval(self.expr, q_min, q_max)

    def _eval(self, node: BoolExpr, q_min: np.ndarray, q_max: np.ndarray) -> np.ndarray:
        if isinstance(node, Var):
            return np.where(self.symbol_masks[node.index][:, None], q_max, q_min)
        if isinstance(node, Not):
            return (q_max + q_min) - self._eval(node.child, q_min, q_max)
        left = self._eval(node.left, q_min, q_max)
        right = self._eval(node.right, q_min, q_max)
        if isinstance(node, And):
            return np.minimum(left, right)
        return np.maximum(left, right)


def compose(expr: BoolExpr, basis: Sequence[BasisWVF], pair: MinMaxPair) -> CompositeWVF:
    """Compose from the 9 basis WVFs (ordered by symbol index)."""
    masks = np.stack([attribute_mask(b.attribute) for b in basis])
    return CompositeWVF(expr, pair, masks)


def compose_from_map(expr: BoolExpr, symbol_map: SymbolMap, pair: MinMaxPair) -> CompositeWVF:
    masks = np.stack(
        [attribute_mask(symbol_map.attribute(i)) for i in range(9)]
    )
    return CompositeWVF(expr, pair, masks)


def greedy_action(composite: CompositeWVF, state: EpisodeState) -> Action:
    """argmax over actions of the max-over-goals composite value; ties break
    in action-enum order."""
    scores = composite.values(state).max(axis=0)
    return Action(int(np.argmax(scores)))


@dataclass(frozen=True)
class Verdict:
    kind: str                      # "invalid_syntax" | "evaluated"
    success_rate: Optional[float]
    episodes: int
    env_steps: int
    episode_lengths: tuple[int, ...] = ()

    @property
    def passed_threshold(self) -> bool:
        return self.kind == "evaluated" and self.success_rate is not None


INVALID = Verdict(kind="invalid_syntax", success_rate=None, episodes=0, env_steps=0)


def run_episode(
    composite: CompositeWVF, start: EpisodeState, config: EnvConfig
) -> tuple[Optional[ObjectSpec], int]:
    """One greedy episode. Returns (picked identity or None, episode length)."""
    state = start
    while not state.terminal:
        action = greedy_action(composite, state)
        state, _, done, picked = envmod.step(state, action, config)
        if done:
            return picked, state.steps_elapsed
    return None, state.steps_elapsed


def rollout_success(
    expr: BoolExpr,
    truth_denotation: frozenset[ObjectSpec],
    symbol_map: SymbolMap,
    n: int,
    config: EnvConfig,
    rng: np.random.Generator,
    resample_layouts: bool = True,
) -> Verdict:
    """Evaluate a candidate expression over n greedy episodes.

    Each episode resets with the ground-truth denotation as required goals;
    success means the picked identity lies in that denotation. With
    `resample_layouts` off, one layout is drawn and only the agent pose is
    re-randomized per episode.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    successes = 0
    lengths = []
    fixed_layout = None
    if not resample_layouts:
        fixed_layout = envmod.reset(config, truth_denotation, rng)
        fixed_pair = min_max_for_layout(fixed_layout, config)
    for _ in range(n):
        if fixed_layout is None:
            start = envmod.reset(config, truth_denotation, rng)
            pair = min_max_for_layout(start, config)
        else:
            start = randomize_agent(fixed_layout, rng)
            pair = fixed_pair
        composite = compose_from_map(expr, symbol_map, pair)
        picked, length = run_episode(composite, start, config)
        lengths.append(length)
        if picked is not None and picked in truth_denotation:
            successes += 1
    return Verdict(
        kind="evaluated",
        success_rate=successes / n,
        episodes=n,
        env_steps=sum(lengths),
        episode_lengths=tuple(lengths),
    )

"""World value functions: goal-conditioned action values under the
extended (wrong-goal-penalizing) reward.

Two backends:
  * exact_dp  - per-layout finite-horizon solve (dp.MinMaxValues)
  * tabular   - Q-learning over a fixed pool of layouts

A basis WVF for an attribute is assembled per goal from the max-task and
min-task WVFs: the max-task slice where the goal satisfies the attribute,
the min-task slice elsewhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import env as envmod
from .dp import LayoutTables, MinMaxValues, PICKUP
from .env import Action, EnvConfig, EpisodeState
from .objects import ALL_OBJECTS, Attribute, N_OBJECTS, ObjectSpec

N_ACTIONS = len(Action)


def attribute_mask(attribute: Attribute) -> np.ndarray:
    """(18,) bool: which goal identities satisfy the attribute."""
    return np.array([attribute.satisfied_by(o) for o in ALL_OBJECTS])


class WVF:
    """Query surface (state, goal, action) -> value."""

    backend: str
    symbol_id: Optional[int] = None

    def values(self, state: EpisodeState) -> np.ndarray:
        """(18, A) action values for every goal at `state`."""
        raise NotImplementedError

    def value(self, state: EpisodeState, goal: ObjectSpec, action: Action) -> float:
        return float(self.values(state)[goal.index, int(action)])


@dataclass(frozen=True)
class MinMaxPair:
    q_min: WVF
    q_max: WVF

    def matrices(self, state: EpisodeState) -> tuple[np.ndarray, np.ndarray]:
        """(q_min, q_max) value matrices, sharing work when possible."""
        if (
            isinstance(self.q_min, ExactWVF)
            and isinstance(self.q_max, ExactWVF)
            and self.q_min.solve is self.q_max.solve
        ):
            solve = self.q_min.solve
            pose = solve.tables.pose_index(state)
            return solve.q_pair(pose, state.remaining_steps)
        return self.q_min.values(state), self.q_max.values(state)


class ExactWVF(WVF):
    backend = "exact_dp"

    def __init__(self, solve: MinMaxValues, kind: str, symbol_id: int | None = None):
        assert kind in ("min", "max")
        self.solve = solve
        self.kind = kind
        self.symbol_id = symbol_id

    def values(self, state: EpisodeState) -> np.ndarray:
        pose = self.solve.tables.pose_index(state)
        q_min, q_max = self.solve.q_pair(pose, state.remaining_steps)
        return q_min if self.kind == "min" else q_max


def min_max_for_layout(layout: EpisodeState, config: EnvConfig) -> MinMaxPair:
    """Exact max-task and min-task WVFs for one layout."""
    solve = MinMaxValues(layout, config)
    return MinMaxPair(q_min=ExactWVF(solve, "min"), q_max=ExactWVF(solve, "max"))


class BasisWVF(WVF):
    """Per-attribute WVF assembled from max/min-task goal slices."""

    def __init__(self, pair: MinMaxPair, attribute: Attribute,
                 symbol_id: int | None = None):
        self.pair = pair
        self.attribute = attribute
        self.backend = pair.q_max.backend
        self.symbol_id = symbol_id
        self._mask = attribute_mask(attribute)

    def values(self, state: EpisodeState) -> np.ndarray:
        q_min, q_max = self.pair.matrices(state)
        return np.where(self._mask[:, None], q_max, q_min)


def build_basis(pair: MinMaxPair, attribute: Attribute,
                symbol_id: int | None = None) -> BasisWVF:
    return BasisWVF(pair, attribute, symbol_id)


# ---------------------------------------------------------------------------
# Tabular backend


@dataclass(frozen=True)
class QLearnParams:
    learning_rate: float = 0.1
    epsilon_init: float = 0.5
    epsilon_final: float = 0.1
    epsilon_decay_steps: int = 200_000
    episodes: int = 20_000
    step_limit: int = 50  # training-episode horizon

    def epsilon(self, step: int) -> float:
        if step >= self.epsilon_decay_steps:
            return self.epsilon_final
        frac = step / self.epsilon_decay_steps
        return self.epsilon_init + frac * (self.epsilon_final - self.epsilon_init)


def layout_key(layout: EpisodeState) -> tuple:
    return (
        layout.width,
        layout.height,
        tuple(sorted((p, o.index) for p, o in layout.objects)),
    )


class TabularWVF(WVF):
    backend = "tabular"

    def __init__(
        self,
        q_tables: dict[tuple, np.ndarray],   # layout key -> (P, 18, A)
        tables: dict[tuple, LayoutTables],
        symbol_id: int | None = None,
    ):
        self.q_tables = q_tables
        self.tables = tables
        self.symbol_id = symbol_id

    def values(self, state: EpisodeState) -> np.ndarray:
        key = layout_key(state)
        if key not in self.q_tables:
            raise KeyError("state is not from a layout in the training pool")
        pose = self.tables[key].pose_index(state)
        return self.q_tables[key][pose]

    def save(self, path: str, attribute: str = "", seed: int | None = None) -> None:
        header = {"backend": self.backend, "attribute": attribute, "seed": seed}
        arrays = {f"q_{i}": q for i, (_, q) in enumerate(sorted(self.q_tables.items()))}
        keys = [k for k, _ in sorted(self.q_tables.items())]
        np.savez(path, header=json.dumps(header), keys=json.dumps(keys), **arrays)


def _free_poses(layout: EpisodeState) -> list[int]:
    occupied = {p for p, _ in layout.objects}
    poses = []
    for y in range(layout.height):
        for x in range(layout.width):
            if (x, y) in occupied:
                continue
            poses.extend((y * layout.width + x) * 4 + d for d in range(4))
    return poses


def randomize_agent(layout: EpisodeState, rng: np.random.Generator) -> EpisodeState:
    """Fresh episode on a fixed layout: random agent pose, step clock reset."""
    occupied = {p for p, _ in layout.objects}
    free = [
        (x, y)
        for y in range(layout.height)
        for x in range(layout.width)
        if (x, y) not in occupied
    ]
    pos = free[rng.integers(len(free))]
    d = envmod.Direction(int(rng.integers(4)))
    return replace(layout, agent_pos=pos, agent_dir=d, steps_elapsed=0, picked=None)


def _goal_reachable(tables: LayoutTables, identity: int) -> bool:
    return bool(np.any(tables.ahead_identity == identity))


def train_tabular_wvf(
    pool: Sequence[EpisodeState],
    goal_rewards: dict[ObjectSpec, float],
    params: QLearnParams,
    config: EnvConfig,
    rng: np.random.Generator,
    warn: Callable[[str], None] | None = None,
) -> TabularWVF:
    """Q-learning over a fixed layout pool under the extended reward.

    Each episode conditions the behavior policy on one goal present in the
    layout; the update is applied to every goal's slice (the extended reward
    for any goal is observable from the picked identity).
    """
    if not pool:
        raise ValueError("layout pool must be nonempty")
    alpha = params.learning_rate
    r0 = config.step_penalty
    rbar = config.wrong_goal_penalty
    task_r = np.array([goal_rewards[o] for o in ALL_OBJECTS])

    tables = {}
    q_tables = {}
    visit_counts = {}
    goals_by_layout = {}
    for layout in pool:
        key = layout_key(layout)
        t = LayoutTables(layout)
        tables[key] = t
        q_tables[key] = np.zeros((t.n_poses, N_OBJECTS, N_ACTIONS))
        visit_counts[key] = np.zeros((t.n_poses, N_ACTIONS), dtype=np.int64)
        goals = []
        for identity in sorted({o.index for _, o in layout.objects}):
            if _goal_reachable(t, identity):
                goals.append(identity)
            elif warn is not None:
                warn(f"goal {ALL_OBJECTS[identity]} unreachable in layout; skipped")
        goals_by_layout[key] = goals

    keys = [layout_key(l) for l in pool]
    free = {k: np.array(_free_poses(l)) for k, l in zip(keys, pool)}
    global_step = 0
    for _ in range(params.episodes):
        key = keys[rng.integers(len(keys))]
        t = tables[key]
        q = q_tables[key]
        goals = goals_by_layout[key]
        if not goals:
            continue
        goal = goals[rng.integers(len(goals))]
        pose = int(free[key][rng.integers(len(free[key]))])
        for step_i in range(params.step_limit):
            eps = params.epsilon(global_step)
            if rng.random() < eps:
                a = int(rng.integers(N_ACTIONS))
            else:
                a = int(np.argmax(q[pose, goal]))
            global_step += 1
            visit_counts[key][pose, a] += 1

            if a == PICKUP and t.term_mask[pose]:
                picked = int(t.ahead_identity[pose])
                target = np.full(N_OBJECTS, rbar)
                target[picked] = r0 + task_r[picked]
                q[pose, :, a] += alpha * (target - q[pose, :, a])
                break
            next_pose = int(t.next_pose[pose, a])
            # bootstrap through the time limit: the clock is not in the state
            target = r0 + q[next_pose].max(axis=1)
            q[pose, :, a] += alpha * (target - q[pose, :, a])
            pose = next_pose
    wvf = TabularWVF(q_tables, tables)
    wvf.visit_counts = visit_counts
    return wvf


def tabular_min_max(
    pool: Sequence[EpisodeState],
    params: QLearnParams,
    config: EnvConfig,
    rng: np.random.Generator,
) -> MinMaxPair:
    q_max = train_tabular_wvf(pool, envmod.max_task_rewards(config), params, config, rng)
    q_min = train_tabular_wvf(pool, envmod.min_task_rewards(config), params, config, rng)
    return MinMaxPair(q_min=q_min, q_max=q_max)


# ---------------------------------------------------------------------------
# Greedy evaluation


def greedy_rollout(
    wvf: WVF, start: EpisodeState, config: EnvConfig
) -> tuple[Optional[ObjectSpec], int]:
    """Act greedily on max-over-goals values. Returns (picked, steps)."""
    state = start
    while not state.terminal:
        scores = wvf.values(state).max(axis=0)
        action = Action(int(np.argmax(scores)))
        state, _, done, picked = envmod.step(state, action, config)
        if done:
            return picked, state.steps_elapsed
    return None, state.steps_elapsed


def basis_success_rate(
    make_basis: Callable[[EpisodeState], WVF],
    attribute: Attribute,
    n_episodes: int,
    config: EnvConfig,
    rng: np.random.Generator,
    layouts: Sequence[EpisodeState] | None = None,
) -> float:
    """Fraction of greedy episodes that pick an attribute-satisfying object.

    Fresh random layouts by default; pass `layouts` to evaluate on a fixed
    pool (tabular backend).
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    satisfying = {o for o in ALL_OBJECTS if attribute.satisfied_by(o)}
    successes = 0
    for _ in range(n_episodes):
        if layouts is None:
            start = envmod.reset(config, satisfying, rng)
        else:
            start = randomize_agent(layouts[rng.integers(len(layouts))], rng)
        wvf = make_basis(start)
        picked, _ = greedy_rollout(wvf, start, config)
        if picked is not None and picked in satisfying:
            successes += 1
    return successes / n_episodes

"""Deterministic pickup gridworld.

The agent moves on an open grid (walls only at the border), objects occupy
cells and block movement. ``pickup`` with an object in the cell directly
ahead ends the episode with that object in hand; every step costs the step
penalty. ``drop``/``toggle``/``done`` are penalized no-ops kept so the
action space stays at 7.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .objects import ALL_OBJECTS, Color, ObjectSpec, Shape


class Action(enum.IntEnum):
    TURN_LEFT = 0
    TURN_RIGHT = 1
    FORWARD = 2
    PICKUP = 3
    DROP = 4
    TOGGLE = 5
    DONE = 6


N_ACTIONS = len(Action)


class Direction(enum.IntEnum):
    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3


# (dx, dy) per direction; y grows southwards
DIR_VEC = ((0, -1), (1, 0), (0, 1), (-1, 0))


class ConfigError(ValueError):
    """Environment configuration that cannot be realized."""


class EpisodeOver(RuntimeError):
    """step() called on a terminal state."""


@dataclass(frozen=True)
class EnvConfig:
    grid_size: int = 8                # interior cells per side
    n_distractors: int = 4
    step_limit: int = 100
    step_penalty: float = -0.1        # r0, paid every step
    goal_reward: float = 2.0          # added on picking the rewarded goal
    wrong_goal_penalty: float = -10.0 # terminal reward for any other pickup

    @property
    def width(self) -> int:
        return self.grid_size

    @property
    def height(self) -> int:
        return self.grid_size


@dataclass(frozen=True)
class EpisodeState:
    width: int
    height: int
    agent_pos: tuple[int, int]
    agent_dir: Direction
    objects: tuple[tuple[tuple[int, int], ObjectSpec], ...]
    step_limit: int
    steps_elapsed: int = 0
    picked: Optional[ObjectSpec] = None

    @property
    def terminal(self) -> bool:
        return self.picked is not None or self.steps_elapsed >= self.step_limit

    @property
    def remaining_steps(self) -> int:
        return self.step_limit - self.steps_elapsed

    def object_at(self, pos: tuple[int, int]) -> Optional[ObjectSpec]:
        for p, obj in self.objects:
            if p == pos:
                return obj
        return None

    def front_pos(self) -> tuple[int, int]:
        dx, dy = DIR_VEC[self.agent_dir]
        return (self.agent_pos[0] + dx, self.agent_pos[1] + dy)

    def in_bounds(self, pos: tuple[int, int]) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height


def layout_to_json(state: EpisodeState) -> str:
    """Snapshot a layout for fixtures and golden tests."""
    doc = {
        "width": state.width,
        "height": state.height,
        "agent": {
            "x": state.agent_pos[0],
            "y": state.agent_pos[1],
            "dir": state.agent_dir.name,
        },
        "objects": [
            {"x": p[0], "y": p[1], "color": o.color.name.lower(),
             "shape": o.shape.name.lower()}
            for p, o in state.objects
        ],
    }
    return json.dumps(doc)


def layout_from_json(text: str, step_limit: int = 100) -> EpisodeState:
    doc = json.loads(text)
    objects = tuple(
        ((d["x"], d["y"]), ObjectSpec(Color[d["color"].upper()], Shape[d["shape"].upper()]))
        for d in doc["objects"]
    )
    return EpisodeState(
        width=doc["width"],
        height=doc["height"],
        agent_pos=(doc["agent"]["x"], doc["agent"]["y"]),
        agent_dir=Direction[doc["agent"]["dir"]],
        objects=objects,
        step_limit=step_limit,
    )


def make_layout(
    width: int,
    height: int,
    agent_pos: tuple[int, int],
    agent_dir: Direction,
    objects: Sequence[tuple[tuple[int, int], ObjectSpec]],
    step_limit: int = 100,
) -> EpisodeState:
    """Hand-place a layout; validates distinctness and bounds."""
    positions = [p for p, _ in objects]
    if len(set(positions)) != len(positions):
        raise ConfigError("object positions must be distinct")
    if agent_pos in positions:
        raise ConfigError("agent cannot start on an object cell")
    state = EpisodeState(width, height, agent_pos, Direction(agent_dir),
                         tuple(objects), step_limit)
    for p in positions + [agent_pos]:
        if not state.in_bounds(p):
            raise ConfigError(f"position out of bounds: {p}")
    return state


def reset(
    config: EnvConfig,
    required_goals: Iterable[ObjectSpec],
    rng: np.random.Generator,
) -> EpisodeState:
    """Sample a fresh episode: one required goal object plus distractors."""
    required = sorted(set(required_goals))
    if not required:
        raise ConfigError("required_goals must be nonempty")
    n_objects = 1 + config.n_distractors
    n_cells = config.width * config.height
    if n_cells < n_objects + 1:
        raise ConfigError(
            f"{config.width}x{config.height} grid cannot hold "
            f"{n_objects} objects plus the agent"
        )

    goal = required[rng.integers(len(required))]
    identities = [goal] + [
        ALL_OBJECTS[rng.integers(len(ALL_OBJECTS))]
        for _ in range(config.n_distractors)
    ]

    cells = rng.choice(n_cells, size=n_objects + 1, replace=False)
    positions = [(int(c) % config.width, int(c) // config.width) for c in cells]
    objects = tuple(zip(positions[:n_objects], identities))
    agent_pos = positions[n_objects]
    agent_dir = Direction(int(rng.integers(4)))
    return EpisodeState(
        width=config.width,
        height=config.height,
        agent_pos=agent_pos,
        agent_dir=agent_dir,
        objects=objects,
        step_limit=config.step_limit,
    )


def step(
    state: EpisodeState, action: Action, config: EnvConfig
) -> tuple[EpisodeState, float, bool, Optional[ObjectSpec]]:
    """Advance one step. Returns (state, base_reward, terminal, picked)."""
    if state.terminal:
        raise EpisodeOver("step() on a terminal state")

    pos, d = state.agent_pos, state.agent_dir
    picked = None
    if action == Action.TURN_LEFT:
        d = Direction((d - 1) % 4)
    elif action == Action.TURN_RIGHT:
        d = Direction((d + 1) % 4)
    elif action == Action.FORWARD:
        ahead = state.front_pos()
        if state.in_bounds(ahead) and state.object_at(ahead) is None:
            pos = ahead
    elif action == Action.PICKUP:
        ahead = state.front_pos()
        if state.in_bounds(ahead):
            picked = state.object_at(ahead)
    # drop/toggle/done: no-ops that consume a step

    new_state = replace(
        state,
        agent_pos=pos,
        agent_dir=d,
        steps_elapsed=state.steps_elapsed + 1,
        picked=picked,
    )
    return new_state, config.step_penalty, new_state.terminal, picked


def extended_reward(
    picked: Optional[ObjectSpec],
    conditioned_goal: ObjectSpec,
    goal_rewards: dict[ObjectSpec, float],
    config: EnvConfig,
) -> float:
    """Goal-conditioned reward: penalize reaching a goal other than the one
    conditioned on; otherwise pay the base reward (plus the task reward at
    the conditioned goal)."""
    if picked is None:
        return config.step_penalty
    if picked != conditioned_goal:
        return config.wrong_goal_penalty
    return config.step_penalty + goal_rewards[picked]


def max_task_rewards(config: EnvConfig) -> dict[ObjectSpec, float]:
    return {o: config.goal_reward for o in ALL_OBJECTS}


def min_task_rewards(config: EnvConfig) -> dict[ObjectSpec, float]:
    return {o: 0.0 for o in ALL_OBJECTS}

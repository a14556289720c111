"""Exact finite-horizon solver for a fixed layout.

Poses are (x, y, dir) triples indexed as (y*W + x)*4 + dir. Transitions are
deterministic, so a layout reduces to a couple of lookup tables and the
backward induction kernel produces optimal goal-conditioned values for
every remaining-step horizon at once.

Goal columns are compressed: each object identity present in the layout
gets its own column, and all absent identities share one column (their
dynamics are identical - no pickup can ever match them).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import Action, EnvConfig, EpisodeState, DIR_VEC
from .kernels import backward_induction
from .objects import ALL_OBJECTS, N_OBJECTS, ObjectSpec

PICKUP = int(Action.PICKUP)


class LayoutTables:
    """Transition tables for one layout."""

    def __init__(self, layout: EpisodeState):
        w, h = layout.width, layout.height
        self.width, self.height = w, h
        self.n_poses = w * h * 4

        obj_grid = np.full((h, w), -1, dtype=np.int32)
        for (x, y), obj in layout.objects:
            obj_grid[y, x] = obj.index

        p = np.arange(self.n_poses, dtype=np.int32)
        d = p % 4
        cell = p // 4
        x = cell % w
        y = cell // w

        dxs = np.array([v[0] for v in DIR_VEC], dtype=np.int32)
        dys = np.array([v[1] for v in DIR_VEC], dtype=np.int32)
        ax, ay = x + dxs[d], y + dys[d]
        in_bounds = (ax >= 0) & (ax < w) & (ay >= 0) & (ay < h)
        ahead_obj = np.where(
            in_bounds, obj_grid[ay.clip(0, h - 1), ax.clip(0, w - 1)], -1
        ).astype(np.int32)
        blocked = ~in_bounds | (ahead_obj >= 0)

        base = cell * 4
        fwd = np.where(blocked, p, (ay * w + ax) * 4 + d).astype(np.int32)
        next_pose = np.empty((self.n_poses, len(Action)), dtype=np.int32)
        next_pose[:, Action.TURN_LEFT] = base + (d - 1) % 4
        next_pose[:, Action.TURN_RIGHT] = base + (d + 1) % 4
        next_pose[:, Action.FORWARD] = fwd
        next_pose[:, Action.PICKUP] = p
        next_pose[:, Action.DROP] = p
        next_pose[:, Action.TOGGLE] = p
        next_pose[:, Action.DONE] = p
        self.next_pose = next_pose

        # identity index of the object directly ahead, -1 if none
        self.ahead_identity = ahead_obj
        self.term_mask = (ahead_obj >= 0)

    def pose_index(self, state: EpisodeState) -> int:
        x, y = state.agent_pos
        return (y * self.width + x) * 4 + int(state.agent_dir)


@dataclass(frozen=True)
class GoalColumns:
    """Mapping from the 18 goal identities to compressed DP columns."""

    goal_to_col: np.ndarray  # (18,) int
    n_cols: int


def goal_columns(layout: EpisodeState) -> GoalColumns:
    present = sorted({obj.index for _, obj in layout.objects})
    goal_to_col = np.full(N_OBJECTS, len(present), dtype=np.int64)
    for col, idx in enumerate(present):
        goal_to_col[idx] = col
    return GoalColumns(goal_to_col, len(present) + 1)


def _terminal_rewards(
    tables: LayoutTables,
    cols: GoalColumns,
    task_rewards: np.ndarray,  # (18,) reward paid on matching pickup
    config: EnvConfig,
) -> np.ndarray:
    """(P, C) terminal pickup reward per pose and goal column."""
    term = np.full(
        (tables.n_poses, cols.n_cols), config.wrong_goal_penalty, dtype=np.float64
    )
    ahead = tables.ahead_identity
    for pose in np.nonzero(tables.term_mask)[0]:
        identity = ahead[pose]
        col = cols.goal_to_col[identity]
        if col < cols.n_cols - 1:  # identity present, matching pickup possible
            term[pose, col] = config.step_penalty + task_rewards[identity]
    return term


class MinMaxValues:
    """Joint exact solve of the maximum and minimum tasks for one layout."""

    def __init__(self, layout: EpisodeState, config: EnvConfig):
        self.layout = layout
        self.config = config
        self.tables = LayoutTables(layout)
        self.cols = goal_columns(layout)

        max_rewards = np.full(N_OBJECTS, config.goal_reward)
        min_rewards = np.zeros(N_OBJECTS)
        term_max = _terminal_rewards(self.tables, self.cols, max_rewards, config)
        term_min = _terminal_rewards(self.tables, self.cols, min_rewards, config)
        self._term_stacked = np.concatenate([term_max, term_min], axis=1)
        self._n_cols = self.cols.n_cols

        self.values = backward_induction(
            self.tables.next_pose,
            self.tables.term_mask.astype(np.uint8),
            self._term_stacked,
            config.step_penalty,
            layout.step_limit,
            PICKUP,
        )

    def q_stacked(self, pose: int, remaining: int) -> np.ndarray:
        """(A, 2C) action values: max-task columns then min-task columns."""
        if remaining < 1:
            raise ValueError("no actions remain")
        cont = self.config.step_penalty + self.values[remaining - 1][
            self.tables.next_pose[pose]
        ]
        if self.tables.term_mask[pose]:
            cont[PICKUP] = self._term_stacked[pose]
        return cont

    def q_pair(self, pose: int, remaining: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-goal action values (q_min, q_max), each (18, A)."""
        cont = self.q_stacked(pose, remaining)
        c = self._n_cols
        gcol = self.cols.goal_to_col
        q_max = cont[:, :c].T[gcol]
        q_min = cont[:, c:].T[gcol]
        return q_min, q_max


class GoalTaskValues:
    """Exact solve of one task (arbitrary per-goal rewards) on one layout."""

    def __init__(
        self,
        layout: EpisodeState,
        goal_rewards: dict[ObjectSpec, float],
        config: EnvConfig,
    ):
        self.layout = layout
        self.config = config
        self.tables = LayoutTables(layout)
        self.cols = goal_columns(layout)
        rewards = np.array([goal_rewards[o] for o in ALL_OBJECTS])
        self._term = _terminal_rewards(self.tables, self.cols, rewards, config)
        self.values = backward_induction(
            self.tables.next_pose,
            self.tables.term_mask.astype(np.uint8),
            self._term,
            config.step_penalty,
            layout.step_limit,
            PICKUP,
        )

    def q(self, pose: int, goal: ObjectSpec, remaining: int) -> np.ndarray:
        """(A,) optimal action values conditioned on `goal`."""
        if remaining < 1:
            raise ValueError("no actions remain")
        col = self.cols.goal_to_col[goal.index]
        cont = self.config.step_penalty + self.values[
            remaining - 1, self.tables.next_pose[pose], col
        ]
        if self.tables.term_mask[pose]:
            cont[PICKUP] = self._term[pose, col]
        return cont

    def v(self, pose: int, goal: ObjectSpec, remaining: int) -> float:
        return float(self.values[remaining, pose, self.cols.goal_to_col[goal.index]])


def solve_episode_dp(
    layout: EpisodeState,
    conditioned_goal: ObjectSpec,
    goal_rewards: dict[ObjectSpec, float],
    config: EnvConfig,
) -> dict[tuple[int, int, int], np.ndarray]:
    """Optimal action values for every pose at the layout's full horizon.

    Returns {(x, y, dir): (A,) values} for the conditioned goal.
    """
    solve = GoalTaskValues(layout, goal_rewards, config)
    table = {}
    occupied = {p for p, _ in layout.objects}
    for y in range(layout.height):
        for x in range(layout.width):
            if (x, y) in occupied:
                continue
            for d in range(4):
                pose = (y * layout.width + x) * 4 + d
                table[(x, y, d)] = solve.q(
                    pose, conditioned_goal, layout.remaining_steps
                )
    return table

"""Pure-Python (numpy) backward induction kernel.

Fallback used when the compiled extension is unavailable. Must stay
numerically identical to the Cython kernel: same float64 arithmetic, same
operation order per horizon step.
"""
from __future__ import annotations

import numpy as np


def backward_induction(
    next_pose: np.ndarray,     # (P, A) int32, pose reached by each action
    term_mask: np.ndarray,     # (P,) bool, pickup here ends the episode
    term_reward: np.ndarray,   # (P, G) float64, terminal pickup reward
    step_penalty: float,
    horizon: int,
    pickup_action: int,
) -> np.ndarray:
    """Finite-horizon optimal values V[h, p, g] for h = 0..horizon."""
    n_poses, _ = next_pose.shape
    n_goals = term_reward.shape[1]
    mask = np.asarray(term_mask, dtype=bool)
    values = np.zeros((horizon + 1, n_poses, n_goals), dtype=np.float64)
    for h in range(1, horizon + 1):
        q = step_penalty + values[h - 1][next_pose]      # (P, A, G)
        q[mask, pickup_action, :] = term_reward[mask]
        np.max(q, axis=1, out=values[h])
    return values

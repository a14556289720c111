# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled backward induction kernel for the finite-horizon value tables."""

import numpy as np

cimport cython


def backward_induction(
    int[:, ::1] next_pose,
    unsigned char[::1] term_mask,
    double[:, ::1] term_reward,
    double step_penalty,
    int horizon,
    int pickup_action,
):
    cdef int n_poses = next_pose.shape[0]
    cdef int n_actions = next_pose.shape[1]
    cdef int n_goals = term_reward.shape[1]

    values_arr = np.zeros((horizon + 1, n_poses, n_goals), dtype=np.float64)
    cdef double[:, :, ::1] values = values_arr

    cdef int h, p, a, g, np_
    cdef double q, best
    with nogil:
        for h in range(1, horizon + 1):
            for p in range(n_poses):
                for g in range(n_goals):
                    best = -1e300
                    for a in range(n_actions):
                        if a == pickup_action and term_mask[p]:
                            q = term_reward[p, g]
                        else:
                            np_ = next_pose[p, a]
                            q = step_penalty + values[h - 1, np_, g]
                        if q > best:
                            best = q
                    values[h, p, g] = best
    return values_arr

"""Fixed layout pools for the tabular backend.

Every pool layout carries one object of each color with all three shapes
represented, so each of the 9 attributes has a satisfying object in every
layout and basis success is measurable pool-wide.
"""
from __future__ import annotations

import numpy as np

from .env import Direction, EpisodeState
from .objects import Color, ObjectSpec, Shape


def attribute_covering_pool(
    grid_size: int,
    pool_size: int,
    rng: np.random.Generator,
    step_limit: int = 100,
) -> list[EpisodeState]:
    n_objects = len(Color)
    n_cells = grid_size * grid_size
    if n_cells < n_objects + 1:
        raise ValueError("grid too small for an attribute-covering layout")
    layouts = []
    for _ in range(pool_size):
        shapes = [Shape(i % len(Shape)) for i in range(n_objects)]
        rng.shuffle(shapes)
        identities = [ObjectSpec(c, s) for c, s in zip(Color, shapes)]
        cells = rng.choice(n_cells, size=n_objects + 1, replace=False)
        positions = [(int(c) % grid_size, int(c) // grid_size) for c in cells]
        layouts.append(
            EpisodeState(
                width=grid_size,
                height=grid_size,
                agent_pos=positions[n_objects],
                agent_dir=Direction(int(rng.integers(4))),
                objects=tuple(zip(positions[:n_objects], identities)),
                step_limit=step_limit,
            )
        )
    return layouts

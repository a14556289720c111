"""Benchmark the backward-induction kernel: compiled extension vs the
pure-numpy fallback.

Usage:
    python benchmarks/bench_value_iteration.py [--layouts N] [--horizon H]
"""
import argparse
import time

import numpy as np

from gridlang.dp import LayoutTables, PICKUP
from gridlang.env import EnvConfig, reset
from gridlang.kernels import KERNEL_BACKEND, _vi_py
from gridlang.objects import ALL_OBJECTS


def workload(n_layouts: int, seed: int):
    config = EnvConfig()
    rng = np.random.default_rng(seed)
    items = []
    for _ in range(n_layouts):
        layout = reset(config, set(ALL_OBJECTS), rng)
        tables = LayoutTables(layout)
        n_goal_cols = len({o.index for _, o in layout.objects}) + 1
        term_reward = rng.uniform(-10.0, 2.0, size=(tables.n_poses, n_goal_cols))
        items.append((tables, term_reward))
    return items


def run(kernel, items, horizon: int):
    t0 = time.perf_counter()
    checksum = 0.0
    for tables, term_reward in items:
        values = kernel(
            tables.next_pose,
            tables.term_mask.astype(np.uint8),
            term_reward,
            -0.1,
            horizon,
            PICKUP,
        )
        checksum += float(np.asarray(values[-1]).sum())
    return time.perf_counter() - t0, checksum


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--layouts", type=int, default=50)
    parser.add_argument("--horizon", type=int, default=100)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    items = workload(args.layouts, args.seed)
    print(f"selected backend at import: {KERNEL_BACKEND}")
    print(f"{args.layouts} layouts, horizon {args.horizon}, "
          f"best of {args.repeats} repeats")

    kernels = [("python", _vi_py.backward_induction)]
    try:
        from gridlang.kernels import _vi

        kernels.append(("compiled", _vi.backward_induction))
    except ImportError:
        print("compiled extension unavailable; benchmarking fallback only")

    results = {}
    checksums = {}
    for name, kernel in kernels:
        best = min(
            run(kernel, items, args.horizon)[0] for _ in range(args.repeats)
        )
        _, checksums[name] = run(kernel, items, args.horizon)
        results[name] = best
        per_layout = 1e3 * best / args.layouts
        print(f"  {name:>9}: {best:.3f}s total, {per_layout:.2f} ms/layout")

    if len(results) == 2:
        assert checksums["python"] == checksums["compiled"], "kernels disagree"
        print(f"  speedup: {results['python'] / results['compiled']:.1f}x "
              "(identical outputs)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#! /usr/bin/env python3
"""Time the numeric kernels on both backends.

Imports the numpy and numba implementation modules directly (bypassing the
CMM_NUMBA dispatch) so one process can time both. The numba functions are
called once on each workload before timing so compilation stays out of the
numbers.
"""

import argparse
import timeit

import numpy as np

from cmmsim import _kernels_np

try:
    from cmmsim import _kernels_nb
except ImportError:
    _kernels_nb = None


def workloads(rng):
    segments = []
    for k in range(8):
        c = k * 1000.0
        segments.append((0.0, c, 7000.0, c, 2.0))
        segments.append((c, 0.0, c, 7000.0, 2.0))
    segments = np.array(segments)
    points = rng.uniform(-500.0, 7500.0, size=(50_000, 2))
    offsets = rng.normal(0.0, 5.0, size=(500, 2))
    measured = rng.normal(3500.0, 2000.0, size=(20, 2))
    weights = rng.random(500)
    weights /= weights.sum()

    n = 40
    adj = rng.random((n, n)) < 0.3
    support = adj | adj.T | np.eye(n, dtype=bool)
    x = rng.normal(0.0, 1.0, size=(n, 2))
    a0 = support / support.sum(axis=1, keepdims=True)

    return {
        "corridor_margins": lambda impl: impl.corridor_margins(points, segments),
        "gnss_log_weights": lambda impl: impl.gnss_log_weights(
            offsets, measured, segments, 1.118
        ),
        "systematic_indices": lambda impl: impl.systematic_indices(weights, 500, 0.37),
        "minimize_output_spread": lambda impl: impl.minimize_output_spread(
            x, support, 0.05, a0, 500, 1e-10
        ),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions")
    parser.add_argument("--number", type=int, default=20, help="calls per repetition")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(99)
    loads = workloads(rng)

    backends = [("numpy", _kernels_np)]
    if _kernels_nb is not None:
        backends.append(("numba", _kernels_nb))
    else:
        print("numba backend not importable; timing numpy only")

    for name, load in loads.items():
        times = {}
        for backend, impl in backends:
            load(impl)  # warm-up: triggers JIT compilation on numba
            best = min(timeit.repeat(lambda: load(impl), repeat=args.repeat, number=args.number))
            times[backend] = best / args.number * 1e3
        line = f"{name:24s} " + "  ".join(
            f"{b}: {times[b]:8.3f} ms" for b, _ in backends
        )
        if len(times) == 2:
            line += f"  speedup: {times['numpy'] / times['numba']:5.2f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

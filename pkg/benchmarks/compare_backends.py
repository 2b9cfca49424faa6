#!/usr/bin/env python3
"""Time the compiled kernel lane against the pure-Python one.

Runs the two hot paths — batched device evaluation and the exhaustive
grid oracle — on identical inputs, checks that both lanes agree, and
prints a small table with the speedup.

Usage::

    python3 benchmarks/compare_backends.py [--batch 200000] [--repeats 3]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sdirand._kernels import available_backends, get_backend


def time_call(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def random_params(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    params = rng.uniform(0.0, 1.0, (n, 10))
    params[:, 0::2] *= math.pi
    params[:, 1::2] *= 2.0 * math.pi
    return np.ascontiguousarray(params)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=200_000, help="devices per eval_batch call")
    parser.add_argument("--repeats", type=int, default=3, help="take the best of this many runs")
    parser.add_argument("--oracle-resolution", type=int, default=7)
    args = parser.parse_args()

    lanes = available_backends()
    if len(lanes) < 2:
        print(f"only one lane built ({lanes[0]}); nothing to compare")
        return 0

    params = random_params(args.batch, 1)
    results: dict[str, dict[str, float]] = {}
    reference = None
    for name in lanes:
        kernel = get_backend(name)
        t_eval = time_call(lambda k=kernel: k.eval_batch(params), args.repeats)
        t_oracle = time_call(
            lambda k=kernel: k.oracle_search(2.7, args.oracle_resolution, 0.05, False),
            args.repeats,
        )
        values = kernel.eval_batch(params)
        if reference is None:
            reference = values
        else:
            for got, want in zip(values, reference):
                np.testing.assert_allclose(got, want, atol=1e-12)
        results[name] = {"eval_batch": t_eval, "oracle_search": t_oracle}

    print(f"batch size {args.batch}, oracle resolution {args.oracle_resolution}, "
          f"best of {args.repeats}")
    header = f"{'task':<16}" + "".join(f"{name:>12}" for name in lanes) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for task in ("eval_batch", "oracle_search"):
        times = [results[name][task] for name in lanes]
        ratio = max(times) / min(times)
        row = f"{task:<16}" + "".join(f"{t:>11.4g}s" for t in times) + f"{ratio:>9.1f}x"
        print(row)
    print("lanes agree on the evaluation batch to 1e-12")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

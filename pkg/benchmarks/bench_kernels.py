"""Compare the compiled accumulator against the pure-Python fallback.

Per-operation timings on a populated table, then a whole engine run.  Both
backends compute bit-identical results; this script only reports speed.

Run:  python benchmarks/bench_kernels.py
"""

import time
from dataclasses import replace

import numpy as np

from gridcast._kernels import HAVE_COMPILED, make_accumulator
from gridcast.config import RunConfig
from gridcast.data import synth_prices
from gridcast.engine import run_market


def fill(acc, dim, n, seed=1):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        acc.update(float(rng.random()),
                   tuple(float(c) for c in rng.random(dim)),
                   float(rng.random()))


def per_op(label, make_args, op, repeats=5):
    best = {}
    for force_pure in (False, True):
        if force_pure is False and not HAVE_COMPILED:
            continue
        acc = make_accumulator(*make_args, force_pure=force_pure)
        fill(acc, make_args[1], 500)
        rng = np.random.default_rng(2)
        args = [(float(rng.random()), tuple(float(c) for c in rng.random(make_args[1])))
                for _ in range(2000)]
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            for p, x in args:
                op(acc, p, x)
            times.append((time.perf_counter() - t0) / len(args))
        best["pure" if force_pure else "compiled"] = min(times)
    row(label, best)


def row(label, best):
    compiled = best.get("compiled")
    pure = best["pure"]
    if compiled:
        print(f"{label:<28} {compiled * 1e6:>10.2f} {pure * 1e6:>10.2f} {pure / compiled:>8.1f}x")
    else:
        print(f"{label:<28} {'-':>10} {pure * 1e6:>10.2f} {'-':>9}")


def engine_run(n=20_000):
    cfg = RunConfig(kernel="grid", grid_size=20, threshold_mode="fixed",
                    epsilon=0.05, holding="per-step", strategy="simple",
                    cost_rate=0.0, seed=5, signal="prev-price-direction")
    outcomes = synth_prices("random-walk", n, 7, sigma=0.01)
    best = {}
    for force_pure in (False, True):
        if force_pure is False and not HAVE_COMPILED:
            continue
        times = []
        for _ in range(3):
            t0 = time.perf_counter()
            run_market(replace(cfg, force_pure=force_pure), outcomes, label="bench")
            times.append((time.perf_counter() - t0) / n)
        best["pure" if force_pure else "compiled"] = min(times)
    row(f"engine step (n={n}, k=2)", best)


def main():
    print(f"compiled extension available: {HAVE_COMPILED}")
    print(f"{'operation':<28} {'compiled us':>10} {'pure us':>10} {'speedup':>9}")
    for dim in (1, 2):
        per_op(f"score (K=20, k={dim})", (20, dim), lambda a, p, x: a.score(p, x))
        per_op(f"solve (K=20, k={dim})", (20, dim), lambda a, p, x: a.solve(x))
        per_op(f"update (K=20, k={dim})", (20, dim), lambda a, p, x: a.update(p, x, 0.5))
    engine_run()


if __name__ == "__main__":
    main()

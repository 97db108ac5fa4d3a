"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from loradeploy import kernels


def cases(seed=0):
    gen = np.random.default_rng(seed)
    x = -10.0 ** gen.uniform(-3, 1, 20_000)
    vals = gen.random(200_000) * 4
    offsets = np.concatenate(([0], np.sort(gen.integers(0, vals.size, 9_999)), [vals.size])).astype(np.int64)
    starts = np.concatenate(([0.0], np.cumsum(gen.uniform(3000, 9000, 200_000) + 100.0)))
    t_hat = gen.uniform(0, starts[-1], 200_000)
    eta = 2.7
    return {
        "hyp2f1 scalar x1000": lambda m: [m.hyp2f1(1.0, -2 / eta, 1 - 2 / eta, xi) for xi in x[:1000]],
        "hyp2f1_array 20k": lambda m: m.hyp2f1_array(1.0, -2 / eta, 1 - 2 / eta, x),
        "segment_log1p_sum 200k": lambda m: m.segment_log1p_sum(vals, offsets),
        "timeline_collisions 200k": lambda m: m.timeline_collisions(starts, 100.0, t_hat, 100.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'kernel':<26}" + "".join(f"{name:>12}" for name in backends) + f"{'speed-up':>10}")
    for label, fn in cases().items():
        times = {name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for name, mod in backends.items()}
        row = f"{label:<26}" + "".join(f"{1e3 * t:>10.2f}ms" for t in times.values())
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

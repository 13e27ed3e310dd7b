"""Compare the compiled and numpy kernel backends on the LP and the DP.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are run on the same seeded instances. Objectives are checked
for agreement before any timing is reported.
"""

import argparse
import statistics
import time

import numpy as np

from trustsel.bench import random_binary_instance
from trustsel.core import BinaryTrustMatrix, BudgetConfig
from trustsel.kernels import get_backend
from trustsel.oracle import exact_select
from trustsel.relaxation import build_lp, solve_lp

CASES = [
    ("lp", "M=4 T=24 B=3 R=3", dict(M=4, T=24, B=3, R=3)),
    ("lp", "M=7 T=48 B=5 R=4", dict(M=7, T=48, B=5, R=4)),
    ("lp", "M=7 T=96 B=7 R=4", dict(M=7, T=96, B=7, R=4)),
    ("dp", "M=7 T=96 B=7 R=4", dict(M=7, T=96, B=7, R=4)),
    ("dp", "M=20 T=500 B=30 R=8", dict(M=20, T=500, B=30, R=8)),
]


def make_instance(seed, M, T, B, R):
    rng = np.random.default_rng(seed)
    A = BinaryTrustMatrix((rng.random((M, T)) < 0.6).astype(np.int8))
    return A, BudgetConfig(B=B, R=R)


def run(kind, A, config, backend):
    if kind == "lp":
        return solve_lp(build_lp(A, config), backend=backend).objective
    return exact_select(A, config, backend=backend).trust_score


def time_case(kind, params, backend, repeat, seeds):
    times = []
    results = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        results = [run(kind, *make_instance(s, **params), backend) for s in seeds]
        times.append(time.perf_counter() - t0)
    return statistics.median(times) / len(seeds), results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    cy = get_backend("cython")
    py = get_backend("python")
    seeds = range(args.seeds)
    print(f"{'kernel':<4} {'instance':<22} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for kind, label, params in CASES:
        t_cy, r_cy = time_case(kind, params, cy, args.repeat, seeds)
        t_py, r_py = time_case(kind, params, py, args.repeat, seeds)
        if not np.allclose(r_cy, r_py, atol=1e-6):
            raise SystemExit(f"backends disagree on {kind} {label}: {r_cy} vs {r_py}")
        print(f"{kind:<4} {label:<22} {1e3 * t_cy:>10.2f} {1e3 * t_py:>10.2f} {t_py / t_cy:>7.1f}x")

    # mixed random suite, as used by the ordering checks
    pairs = [random_binary_instance(s) for s in range(50)]
    for name, kern in (("cython", cy), ("python", py)):
        t0 = time.perf_counter()
        for A, config in pairs:
            solve_lp(build_lp(A, config), backend=kern)
            exact_select(A, config, backend=kern)
        print(f"random suite (50 instances, LP + DP) {name}: {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()

"""Compare the numba and numpy kernel backends on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--pairs 10000]
"""

import argparse
import statistics
import time
from contextlib import contextmanager

import numpy as np

from varbewley import _kernels, generators as gen
from varbewley.audit import NoDecomposition, check_theorem1_condition, decompose_utility
from varbewley.oracle import grid_priors, sampled_pareto_audit
from varbewley.report import load_profile

BACKENDS = {
    "numpy": (_kernels._simplex_iterate_numpy, _kernels._grid_min_numpy),
    "numba": (_kernels._simplex_iterate_numba, _kernels._grid_min_numba),
}


@contextmanager
def backend(name):
    saved = _kernels.simplex_iterate, _kernels.grid_min
    _kernels.simplex_iterate, _kernels.grid_min = BACKENDS[name]
    try:
        yield
    finally:
        _kernels.simplex_iterate, _kernels.grid_min = saved


def grid_workload(S, r, n_pairs):
    rng = np.random.default_rng(0)
    L = grid_priors(S, r)
    cvals = rng.uniform(0, 1, size=L.shape[0])
    D = rng.uniform(-8, 8, size=(n_pairs, S))

    def run():
        return _kernels.grid_min(D, L, cvals)
    return run


def condition_workload(n_profiles):
    profiles = []
    for seed in range(n_profiles):
        rng = np.random.default_rng(seed)
        profiles.append(gen.random_profile(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4))))

    def run():
        for p in profiles:
            d = decompose_utility(p)
            if not isinstance(d, NoDecomposition):
                check_theorem1_condition(p, d)
    return run


def audit_workload(n_pairs):
    p = load_profile("example1.json")

    def run():
        return sampled_pareto_audit(p, n_pairs, seed=0)
    return run


def timed(fn, repeat):
    fn()  # warm-up, includes JIT compilation for numba
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=10_000)
    ap.add_argument("--profiles", type=int, default=40)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    workloads = {
        f"grid_min S=3 r=30, {args.pairs} pairs": grid_workload(3, 30, args.pairs),
        f"grid_min S=4 r=12, {args.pairs} pairs": grid_workload(4, 12, args.pairs),
        f"condition sweep, {args.profiles} random profiles": condition_workload(args.profiles),
        f"Pareto audit on example1, {args.pairs} pairs": audit_workload(args.pairs),
    }
    width = max(map(len, workloads))
    print(f"{'workload':<{width}}  {'numpy [s]':>10}  {'numba [s]':>10}  {'speedup':>8}")
    for label, fn in workloads.items():
        t = {}
        for name in ("numpy", "numba"):
            with backend(name):
                t[name] = timed(fn, args.repeat)
        print(f"{label:<{width}}  {t['numpy']:>10.4f}  {t['numba']:>10.4f}  "
              f"{t['numpy'] / t['numba']:>7.2f}x")


if __name__ == "__main__":
    main()

"""Benchmark: compiled kernels vs the pure-Python fallback.

Times the two hot paths of the search loop (surrogate prefix evaluation and
credit-guided roulette picks) plus a short end-to-end search with each
backend, and prints the speedups.  Run as:

    python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from esrn_search._kernels import _pykernels

try:
    from esrn_search._kernels import _ckernels
except ImportError:
    _ckernels = None


def time_call(fn, repeats):
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_surrogate(impl, repeats=20_000):
    rng = np.random.default_rng(0)
    state = rng.integers(0, 2, 20).astype(np.int64)
    tcode = rng.integers(0, 3, 20).astype(np.int64)
    layers = np.array([4, 6, 8], dtype=np.int64)[rng.integers(0, 3, 20)]
    growth = np.array([16, 24, 32, 48, 64], dtype=np.int64)[rng.integers(0, 5, 20)]
    recursion = rng.integers(1, 5, 20).astype(np.int64)
    out = np.empty(int(state.sum()) + 1)

    def call():
        impl.surrogate_prefix(state, tcode, layers, growth, recursion,
                              0x1234567890AB, 7, False, out)

    return time_call(call, repeats)


def bench_credit_pick(impl, repeats=20_000):
    rng = np.random.default_rng(1)
    values = rng.normal(size=450)
    counts = rng.integers(0, 3, 450).astype(np.int64)
    fills = rng.normal(size=450) * 0.1
    us = rng.random(repeats)
    it = iter(range(repeats))

    def call():
        impl.credit_pick(values, counts, fills, 0.001, float(us[next(it)]))

    return time_call(call, repeats)


def bench_search(pure: bool) -> float:
    env = dict(os.environ)
    if pure:
        env["ESRN_PURE_PYTHON"] = "1"
    else:
        env.pop("ESRN_PURE_PYTHON", None)
    code = ("import time; from esrn_search.evolution import SearchConfig, run_search; "
            "t=time.perf_counter(); run_search(SearchConfig(seed=0, generations=10)); "
            "print(time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    if _ckernels is None:
        print("compiled backend not built; run pip install -e . first")
        return 1

    rows = []
    for name, fn in (("surrogate_prefix", bench_surrogate),
                     ("credit_pick", bench_credit_pick)):
        t_py = fn(_pykernels)
        t_c = fn(_ckernels)
        rows.append((name, t_py * 1e6, t_c * 1e6, t_py / t_c))

    t_search_py = bench_search(pure=True)
    t_search_c = bench_search(pure=False)
    rows.append(("search (10 generations)", t_search_py * 1e6,
                 t_search_c * 1e6, t_search_py / t_search_c))

    print(f"{'kernel':<26}{'pure-python':>14}{'compiled':>12}{'speedup':>9}")
    for name, t_py, t_c, speedup in rows:
        print(f"{name:<26}{t_py:>12.1f}us{t_c:>10.1f}us{speedup:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Time the numba kernels against their numpy fallbacks on realistic inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call compiles (or loads from the cache); it is run once
before timing. Results are checked for agreement before anything is timed.
"""
import argparse
import time

import numpy as np

from lacunary import kernels
from lacunary._accel import HAVE_NUMBA


def _inputs(rng):
    Q = 100003
    res = rng.integers(1, Q, size=256, dtype=np.int64)
    js = np.array([1, 2, 3], dtype=np.int64)
    ac = np.array([1.0, 0.5, 0.0])
    bc = np.array([0.0, 0.0, 0.25])
    phases = rng.integers(0, 2 ** 64, size=1 << 18, dtype=np.uint64)
    vals = rng.standard_normal(1 << 18)
    ck = np.arange(15, 1 << 18, dtype=np.int64)
    denom = np.sqrt(2.0 * (ck + 1) * np.log(np.log(ck + 1.0)))
    e = np.sort(rng.choice(1 << 40, size=600, replace=False)).astype(np.int64)
    c = rng.standard_normal(600) + 0j
    return {
        "grid_sums": (res, 0, 1, Q, Q, js, ac, bc),
        "fixed_point_eval": (phases, js, ac, bc),
        "running_lil": (vals, ck, denom),
        "sparse_mul": (e, c, -e, c),
    }


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    inputs = _inputs(np.random.default_rng(7))
    print(f"{'kernel':<18}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, a in inputs.items():
        ref = kernels.NUMPY_KERNELS[name](*a)
        got = kernels.NUMBA_KERNELS[name](*a)  # compiles on first use
        for x, y in zip(ref if isinstance(ref, tuple) else (ref,),
                        got if isinstance(got, tuple) else (got,)):
            np.testing.assert_allclose(y, x, rtol=1e-9, atol=1e-9)
        t_np = _time(kernels.NUMPY_KERNELS[name], a, args.repeat)
        t_nb = _time(kernels.NUMBA_KERNELS[name], a, args.repeat)
        print(f"{name:<18}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()

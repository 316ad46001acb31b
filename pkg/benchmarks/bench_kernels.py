"""Time the numba and pure-numpy kernel paths side by side.

    python benchmarks/bench_kernels.py --n 250 1000 2000 --repeat 5

Both forms are called directly, so one process measures both regardless of
ISLNET_NUMBA. Outputs are checked for equality before timing.
"""
import argparse
import time

import numpy as np

from islnet import _accel, kernels
from islnet.constellation import generate_random
from islnet.topology import build_cutoff, compute_d_max


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[250, 1000, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--candidates", type=int, default=16)
    args = ap.parse_args()

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; install the 'fast' extra to compare")

    d_max = compute_d_max(550)
    print(f"{'kernel':<14}{'N':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}  equal")
    for n in args.n:
        pos = np.ascontiguousarray(generate_random(n, 550, 0).positions)
        indptr, indices, w, _ = build_cutoff(generate_random(n, 550, 0), d_max).csr
        cases = {
            "cutoff": (lambda: kernels.cutoff_pairs_jit(pos, d_max),
                       lambda: kernels.cutoff_pairs_numpy(pos, d_max)),
            "nearest-hop": (lambda: kernels.nearest_hop_pairs_jit(pos, args.candidates),
                            lambda: kernels.nearest_hop_pairs_numpy(pos, args.candidates)),
            "sssp": (lambda: kernels.sssp_jit(indptr, indices, w, np.int64(0)),
                     lambda: kernels.sssp_numpy(indptr, indices, w, 0)),
        }
        for name, (fast, slow) in cases.items():
            ok = same(fast(), slow())  # also triggers compilation
            t_fast = best_of(fast, args.repeat)
            t_slow = best_of(slow, args.repeat)
            print(f"{name:<14}{n:>6}{t_fast * 1e3:>12.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}  {ok}")


if __name__ == "__main__":
    main()

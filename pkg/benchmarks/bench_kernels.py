"""Compare the numba kernels with their numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py [--m 2000] [--n 200] [--repeat 3]
"""
import argparse
import time

import numpy as np

from snpshare import encode, generate_synthetic
from snpshare import kernels


def best_of(fn, repeat):
    fn()  # warm-up (triggers JIT compilation for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def theta_inputs(ref, block=256):
    bits = encode(ref).astype(np.float64)
    n, P = bits.shape
    block = min(block, P)
    n11 = np.rint(bits[:, :block].T @ bits).astype(np.int64)
    colsum = bits.sum(axis=0).astype(np.int64)
    logt = np.log(np.arange(n + 1, dtype=np.float64) + 0.5)
    outs = [np.empty(block) for _ in range(4)]
    return (n11, colsum, n, 0, logt, *outs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    case, control = generate_synthetic(args.n, args.n, args.m, n_assoc=args.m // 20,
                                       maf_shift=0.25, seed=0)
    targs = theta_inputs(control)
    q = np.ascontiguousarray(case.values)
    r = np.ascontiguousarray(control.values)

    rows = [
        ("theta_rows", lambda: kernels.theta_rows_numba(*targs),
         lambda: kernels.theta_rows_numpy(*targs)),
        ("min_hamming", lambda: kernels.min_hamming_numba(q, r, False),
         lambda: kernels.min_hamming_numpy(q, r, False)),
    ]
    a, b = kernels.min_hamming_numba(q, r, False), kernels.min_hamming_numpy(q, r, False)
    assert np.array_equal(a, b), "min_hamming backends disagree"

    print(f"n={args.n} m={args.m} repeat={args.repeat}")
    print(f"{'kernel':<14}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for name, fast, slow in rows:
        tn, tp = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<14}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}x")


if __name__ == "__main__":
    main()

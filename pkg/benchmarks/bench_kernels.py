"""Compare the compiled and numpy elimination/product kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Each workload runs on identical random inputs for both backends and the
results are checked for equality before timings are reported.
"""

import argparse
import time

import numpy as np

from ldrncode.gf import field_create
from ldrncode.gf._backend import load_backend


def _eliminate(mod, f, mats):
    tabs = f.kernel_tables()
    out = []
    for m in mats:
        work = m.copy()
        piv = np.zeros(min(work.shape), dtype=np.int64)
        out.append(mod.eliminate(work, work.shape[1], *tabs, piv)[0])
    return out


def _inverse(mod, f, mats):
    tabs = f.kernel_tables()
    out = []
    for m in mats:
        n = m.shape[0]
        work = np.ascontiguousarray(np.hstack([m, np.eye(n, dtype=np.int64)]))
        piv = np.zeros(n, dtype=np.int64)
        rank = mod.eliminate(work, n, *tabs, piv)[0]
        out.append(work[:, n:].copy() if rank == n else None)
    return out


def _matmul(mod, f, pairs):
    tabs = f.kernel_tables()[:4]
    return [mod.matmul(a, b, *tabs) for a, b in pairs]


def workloads(rng):
    for pk, n, count in [((2, 1), 4, 3000), ((2, 3), 4, 3000), ((7, 1), 12, 500), ((2, 8), 24, 100), ((3, 1), 64, 20)]:
        f = field_create(*pk)
        mats = [f.random(rng, (n, n)) for _ in range(count)]
        pairs = [(f.random(rng, (n, n)), f.random(rng, (n, n))) for _ in range(count)]
        yield f, n, count, mats, pairs


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn()
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    try:
        cy = load_backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    py = load_backend("python")
    rng = np.random.default_rng(args.seed)
    print(f"{'field':>9} {'n':>3} {'count':>5} {'op':>9} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for f, n, count, mats, pairs in workloads(rng):
        for name, op, data in (("rank", _eliminate, mats), ("inverse", _inverse, mats), ("matmul", _matmul, pairs)):
            tc, rc = timeit(lambda: op(cy, f, data), args.repeat)
            tp, rp = timeit(lambda: op(py, f, data), args.repeat)
            same = all(
                (a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b))
                for a, b in zip(rc, rp)
            )
            if not same:
                raise SystemExit(f"backends disagree on {name} over {f!r}")
            print(f"{repr(f):>9} {n:>3} {count:>5} {name:>9} {tc * 1e3:>10.1f} {tp * 1e3:>10.1f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()

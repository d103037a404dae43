"""Compare the compiled and pure-Python kernel backends.

Times the batched tridiagonal factor/solve used by the diagonalization step
(N//2 + 1 shifted systems of size M) and the CQ power-series recurrence, and
reports thread scaling of the batched solve.

    python benchmarks/bench_kernels.py --N 512 --M 999 --repeat 3
"""
import argparse
import os
import time

import numpy as np

from pintbdf import kernels


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def shifted_batch(N, M, seed=0):
    rng = np.random.default_rng(seed)
    h = 1.0 / (M + 1)
    shifts = rng.uniform(0.5, 2.0, N // 2 + 1) * np.exp(1j * rng.uniform(-1.2, 1.2, N // 2 + 1))
    d = shifts[:, None] * (2 * h / 3) + 2 / h
    off = shifts[:, None] * (h / 6) - 1 / h
    lower = np.broadcast_to(off, (len(shifts), M - 1))
    rhs = rng.standard_normal((len(shifts), M)) + 1j * rng.standard_normal((len(shifts), M))
    return lower, np.broadcast_to(d, (len(shifts), M)), rhs


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--M", type=int, default=999)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--threads", default="1,2,4")
    args = p.parse_args(argv)

    lower, diag, rhs = shifted_batch(args.N, args.M)
    print(f"cpus={os.cpu_count()}  affinity={len(os.sched_getaffinity(0))}  systems={diag.shape[0]}  M={args.M}")
    results = {}
    for name in sorted(kernels.BACKENDS):
        t_f = _best(lambda: kernels.TridiagonalBatch(lower, diag, lower, backend=name), args.repeat)
        batch = kernels.TridiagonalBatch(lower, diag, lower, backend=name)
        t_s = _best(lambda: batch.solve(rhs), args.repeat)
        coef = np.array([1.8333333333333333, -3.0, 1.5, -0.3333333333333333])
        t_p = _best(lambda: kernels.power_series(coef, 0.5, 10_000, backend=name), args.repeat)
        results[name] = (t_f, t_s, t_p)
        print(f"{name:>9}: factor {1e3 * t_f:9.2f} ms  solve {1e3 * t_s:9.2f} ms  cq-weights(1e4) {1e3 * t_p:9.2f} ms")
    if "compiled" in results:
        c, py = results["compiled"], results["python"]
        print("speedup compiled/python: factor {:.1f}x  solve {:.1f}x  cq-weights {:.1f}x".format(
            py[0] / c[0], py[1] / c[1], py[2] / c[2]))

    base = None
    for t in (int(x) for x in args.threads.split(",")):
        batch = kernels.TridiagonalBatch(lower, diag, lower, threads=t)
        ts = _best(lambda: batch.solve(rhs), args.repeat)
        base = base or ts
        print(f"threads={t}: solve {1e3 * ts:8.2f} ms  speedup {base / ts:.2f}x")


if __name__ == "__main__":
    main()

"""Compare the numba and numpy kernel backends.

Usage:
    python benchmarks/bench_kernels.py [--reps 20] [--run]

Times each kernel at the sizes a MoHAEA run uses and checks that both
backends agree. With ``--run`` it also times a short full run under each
backend in a subprocess (the backend is fixed at import time).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mohaea import kernels


def best_of(fn, reps: int) -> float:
    fn()  # warm up / compile
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    for N, m in ((100, 2), (300, 3), (1000, 3)):
        F = rng.random((N, m))
        yield f"dominance_counts N={N} m={m}", kernels.dominance_counts_numba, kernels.dominance_counts_numpy, (F,)
        yield f"nondominated_mask N={N} m={m}", kernels.nondominated_mask_numba, kernels.nondominated_mask_numpy, (F,)
    for R, A in ((1000, 100), (5050, 300)):
        ref, P = rng.random((R, 3)), rng.random((A, 3))
        yield f"min_distances {R}x{A}", kernels.min_distances_numba, kernels.min_distances_numpy, (ref, P)
    for N in (100, 300, 3000):
        W = rng.dirichlet(np.ones(3), N)
        args = (rng.random((N, 3)), rng.random((N, 3)), W, np.zeros(3))
        yield f"pair_fitness N={N}", kernels.pair_fitness_numba, kernels.pair_fitness_numpy, args


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def time_run(backend: str) -> float:
    env = dict(os.environ, MOHAEA_DISABLE_NUMBA="1" if backend == "numpy" else "0")
    code = (
        "import time; from mohaea import MoHaeaConfig, mohaea_run;"
        "mohaea_run(MoHaeaConfig(problem='ZDT1', max_evals=2000));"
        "t=time.perf_counter(); mohaea_run(MoHaeaConfig(problem='DTLZ2', N=300, max_evals=75000));"
        "print(time.perf_counter()-t)"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--run", action="store_true", help="also time a full DTLZ2 run per backend")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"{'kernel':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, fast, slow, inputs in cases(rng):
        tn = best_of(lambda: fast(*inputs), args.reps)
        tp = best_of(lambda: slow(*inputs), args.reps)
        ok = same(fast(*inputs), slow(*inputs))
        print(f"{name:34s} {tn * 1e3:10.3f} {tp * 1e3:10.3f} {tp / tn:8.1f}  {ok}")

    if args.run:
        for backend in ("numba", "numpy"):
            print(f"DTLZ2 full run ({backend}): {time_run(backend):.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Time the numba and numpy backends on the exact ring step and the Monte Carlo sweep.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from ising_rg import kernels
from ising_rg.dynamics import DynamicsParams, gibbs_initial_distribution, ring_kernel_table


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--ring-sites", type=int, default=14)
    parser.add_argument("--replicas", type=int, default=2048)
    args = parser.parse_args()

    params = DynamicsParams()
    N = args.ring_sites
    p = gibbs_initial_distribution(0.5, N)
    kernel = ring_kernel_table(params, 0.25)

    rng = np.random.default_rng(0)
    R, M, T = args.replicas, 256, 60
    spins = np.where(rng.random((R, M)) < 0.5, 1, -1).astype(np.int8)
    noise = rng.standard_normal((R, T, M))
    ks = 0.5 * 0.5 ** np.arange(T)
    sites = np.array([100, 103])
    checkpoints = np.arange(0, T + 1, 10)

    results = {}
    for backend in kernels.BACKENDS:
        if backend == "numba" and not kernels.HAVE_NUMBA:
            print("numba not installed; skipping")
            continue
        # warm up so numba compile time is not measured
        kernels.ring_step(p, kernel, N, backend=backend)
        kernels.sync_run(spins[:2], noise[:2], ks, 1.0, 1.0, sites, checkpoints, backend=backend)
        step = best_of(lambda: kernels.ring_step(p, kernel, N, backend=backend), args.repeat)
        sweep = best_of(lambda: kernels.sync_run(spins, noise, ks, 1.0, 1.0, sites, checkpoints, backend=backend), args.repeat)
        results[backend] = (step, sweep)
        print(f"{backend:6s} ring_step N={N}: {step * 1e3:9.2f} ms   sync_run {R}x{M}x{T}: {sweep * 1e3:9.2f} ms")

    if len(results) == 2:
        a = kernels.ring_step(p, kernel, N, backend="numba")
        b = kernels.ring_step(p, kernel, N, backend="numpy")
        same = np.array_equal(
            kernels.sync_run(spins, noise, ks, 1.0, 1.0, sites, checkpoints, backend="numba"),
            kernels.sync_run(spins, noise, ks, 1.0, 1.0, sites, checkpoints, backend="numpy"),
        )
        print(f"ring_step max diff {np.max(np.abs(a - b)):.1e}; sync_run records identical: {same}")
        print(
            f"speedup numba/numpy: ring_step {results['numpy'][0] / results['numba'][0]:.1f}x, "
            f"sync_run {results['numpy'][1] / results['numba'][1]:.1f}x"
        )


if __name__ == "__main__":
    main()

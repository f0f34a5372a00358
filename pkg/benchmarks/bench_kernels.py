"""Benchmark the compiled kernel against the pure-NumPy fallback.

Usage:  python benchmarks/bench_kernels.py [--repeats N]

Times the raw delay-Doppler surface kernel on the reference scenario sizes
and the end-to-end estimator with each backend patched in.  The compiled
core wins on estimator-sized surfaces; on very large dense grids the
fallback's multithreaded BLAS matmul takes over, which is expected and fine
(those only occur in one-off surface exports).
"""

import argparse
import math
import time

import numpy as np

import ddsense._kernels as kernels
from ddsense import EstimatorConfig, estimate
from ddsense.config import default_config
from ddsense.harness import build_scenario


def time_callable(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernel(impl, n_used, n_tau, n_alpha, repeats):
    rng = np.random.default_rng(0)
    weights = rng.normal(size=n_used) + 1j * rng.normal(size=n_used)
    f = rng.integers(0, 32, size=n_used).astype(float)
    t = rng.integers(0, 20, size=n_used).astype(float)
    taus = (np.arange(n_tau) + 1.0) / n_tau
    alphas = (np.arange(n_alpha) + 1.0) / n_alpha - 0.5
    return time_callable(lambda: impl(weights, f, t, taus, alphas), repeats)


def bench_estimator(impl, repeats):
    cfg = default_config()
    scenario = build_scenario(cfg, 20.0)
    est_cfg = EstimatorConfig(n_paths=3, final_joint_refine=True)
    original = kernels.phase_surface
    kernels.phase_surface = impl
    try:
        return time_callable(lambda: estimate(scenario.obs, est_cfg), repeats)
    finally:
        kernels.phase_surface = original


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    impls = kernels.backends()
    if "compiled" not in impls:
        print("note: compiled backend not built; run `python setup.py build_ext --inplace`")
    cases = [
        ("coarse grid 128x80, 260 REs", dict(n_used=260, n_tau=128, n_alpha=80)),
        ("ambiguity 256x160, 260 REs", dict(n_used=260, n_tau=256, n_alpha=160)),
        ("dense grid 512x320, 640 REs", dict(n_used=640, n_tau=512, n_alpha=320)),
    ]
    print(f"active backend: {kernels.BACKEND}\n")
    print(f"{'case':<32} " + " ".join(f"{name:>12}" for name in impls) + "   speedup")
    baselines = {}
    for label, sizes in cases:
        times = {name: bench_kernel(impl, repeats=args.repeats, **sizes)
                 for name, impl in impls.items()}
        baselines[label] = times
        ratio = times["python"] / times.get("compiled", times["python"])
        cells = " ".join(f"{times[name] * 1e3:>10.2f}ms" for name in impls)
        print(f"{label:<32} {cells}   {ratio:>6.2f}x")

    print()
    times = {name: bench_estimator(impl, repeats=max(3, args.repeats // 2))
             for name, impl in impls.items()}
    ratio = times["python"] / times.get("compiled", times["python"])
    cells = " ".join(f"{times[name] * 1e3:>10.2f}ms" for name in impls)
    print(f"{'estimate(), 3 paths, SNR 20 dB':<32} {cells}   {ratio:>6.2f}x")


if __name__ == "__main__":
    main()

"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths behind scoring and distance export: batched
per-component Gaussian log-densities and the pairwise min-Mahalanobis
matrix.  Run from a checkout::

    python benchmarks/bench_kernels.py --n 400 --dim 128 --k 2
"""

import argparse
import time

import numpy as np

from twfr_gmm import kernels


def _random_model(rng, k, dim):
    means = rng.normal(size=(k, dim))
    prec_chols = np.empty((k, dim, dim))
    log_det = np.empty(k)
    for i in range(k):
        a = rng.normal(size=(dim, dim)) / np.sqrt(dim)
        cov = a @ a.T + np.eye(dim)
        chol = np.linalg.cholesky(cov)
        prec = np.linalg.inv(chol)
        prec_chols[i] = prec
        log_det[i] = np.sum(np.log(np.diag(prec)))
    return means, prec_chols, log_det


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=400, help="number of feature vectors")
    parser.add_argument("--dim", type=int, default=128, help="feature dimension")
    parser.add_argument("--k", type=int, default=2, help="mixture components")
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats (best kept)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    x = rng.normal(size=(args.n, args.dim))
    means, prec_chols, log_det = _random_model(rng, args.k, args.dim)

    names = kernels.available_backends()
    if "numba" not in names:
        print("note: numba backend unavailable, timing numpy only")

    print(f"n={args.n} dim={args.dim} k={args.k} (best of {args.repeat})")
    header = f"{'kernel':<24}" + "".join(f"{n:>12}" for n in names)
    print(header)
    print("-" * len(header))

    results = {}
    for name in names:
        previous = kernels.use_backend(name)
        kernels.warm_up()
        logg = _best_of(lambda: kernels.log_gaussians(x, means, prec_chols, log_det),
                        args.repeat)
        pair = _best_of(lambda: kernels.pairwise_min_mahalanobis(x, prec_chols),
                        args.repeat)
        results[name] = (logg, pair)
        kernels.use_backend(previous)

    for row, label in ((0, "log_gaussians"), (1, "pairwise_min_mahalanobis")):
        line = f"{label:<24}"
        for name in names:
            line += f"{results[name][row] * 1e3:>10.2f}ms"
        print(line)

    if "numba" in results and "numpy" in results:
        for row, label in ((0, "log_gaussians"), (1, "pairwise_min_mahalanobis")):
            speedup = results["numpy"][row] / results["numba"][row]
            print(f"{label}: numba is {speedup:.1f}x vs numpy")


if __name__ == "__main__":
    main()

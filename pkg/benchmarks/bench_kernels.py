"""Benchmark the numba kernels against their pure-numpy fallbacks.

Both flavours are importable regardless of SFIEGARCH_BACKEND, so a single
process can time them side by side:

    python benchmarks/bench_kernels.py [--n 5000] [--m 20000] [--repeat 20]
"""

import argparse
import time

import numpy as np

from sfiegarch._backend import BACKEND, HAVE_NUMBA
from sfiegarch.coeffs import _lambda_recurrence_py, _recurrence_inner_weights
from sfiegarch.kernels import (
    arma_residuals_numba,
    arma_residuals_numpy,
    egarch_filter_numba,
    egarch_filter_numpy,
)
from sfiegarch.model import SfiegarchSpec


def timeit(fn, *args, repeat=20):
    fn(*args)  # warm-up / jit compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=5000, help="series length")
    parser.add_argument("--m", type=int, default=20_000, help="recurrence truncation")
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    print(f"active backend: {BACKEND} (numba importable: {HAVE_NUMBA})")
    rng = np.random.default_rng(0)

    x = rng.standard_normal(args.n)
    lam = np.abs(rng.standard_normal(args.n - 1)) * 0.05
    filt_args = (x, lam, 0.1, -0.25, 0.24, 0.7978845608028654)
    rows = [("egarch filter (numpy)", timeit(egarch_filter_numpy, *filt_args, repeat=args.repeat))]
    if HAVE_NUMBA:
        rows.append(
            ("egarch filter (numba)", timeit(egarch_filter_numba, *filt_args, repeat=args.repeat))
        )

    spec = SfiegarchSpec(d=0.35, s=6, theta=-0.25, gamma_mag=0.24, alpha=(0.3,), beta=(0.2,))
    alpha = np.asarray(spec.alpha)
    beta = np.asarray(spec.beta)
    w = _recurrence_inner_weights(spec, args.m)
    rec_args = (alpha, beta, w, args.m)
    rows.append(
        ("lambda recurrence (numpy)", timeit(_lambda_recurrence_py, *rec_args, repeat=3))
    )
    if HAVE_NUMBA:
        from sfiegarch.coeffs import _lambda_recurrence_jit

        rows.append(
            ("lambda recurrence (numba)", timeit(_lambda_recurrence_jit, *rec_args, repeat=3))
        )

    r = rng.standard_normal(args.n)
    ar_lags = np.array([7, 13], dtype=np.int64)
    ar_coefs = np.array([0.05, -0.08])
    ma_lags = np.array([1], dtype=np.int64)
    ma_coefs = np.array([0.4])
    arma_args = (r, 0.01, ar_lags, ar_coefs, ma_lags, ma_coefs, 0.0)
    rows.append(
        ("arma residuals (numpy)", timeit(arma_residuals_numpy, *arma_args, repeat=args.repeat))
    )
    if HAVE_NUMBA:
        rows.append(
            ("arma residuals (numba)", timeit(arma_residuals_numba, *arma_args, repeat=args.repeat))
        )

    width = max(len(name) for name, _ in rows)
    print(f"\n{'kernel':<{width}}  ms/call")
    for name, sec in rows:
        print(f"{name:<{width}}  {sec * 1e3:9.3f}")


if __name__ == "__main__":
    main()

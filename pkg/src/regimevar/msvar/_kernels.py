"""Inner recursion kernels for the filter and smoother.

Written as plain scalar-loop Python so numba can JIT them when available;
without numba they still run correctly (regime counts are small, so the
fallback remains usable).  Error conditions are signalled through integer
flags because the callers attach context to the raised exceptions.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly via the jitted path
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

__all__ = ["filter_kernel", "smoother_kernel", "HAVE_NUMBA"]


@njit(cache=True)
def filter_kernel(logf, P, rho):
    """Scaled forward recursion.

    Returns (filtered, predicted, per_period_loglik, bad_t); bad_t >= 0 marks
    the first period where every regime density underflowed.
    """
    T, K = logf.shape
    filtered = np.zeros((T, K))
    predicted = np.zeros((T, K))
    loglik = np.zeros(T)
    pred = rho.copy()
    for t in range(T):
        m = -np.inf
        for k in range(K):
            if logf[t, k] > m:
                m = logf[t, k]
        if not np.isfinite(m):
            return filtered, predicted, loglik, t
        s = 0.0
        for k in range(K):
            v = np.exp(logf[t, k] - m) * pred[k]
            filtered[t, k] = v
            s += v
        if s <= 0.0 or not np.isfinite(s):
            return filtered, predicted, loglik, t
        loglik[t] = np.log(s) + m
        for k in range(K):
            predicted[t, k] = pred[k]
            filtered[t, k] /= s
        for j in range(K):
            acc = 0.0
            for i in range(K):
                acc += filtered[t, i] * P[i, j]
            pred[j] = acc
        ps = 0.0
        for j in range(K):
            ps += pred[j]
        for j in range(K):
            pred[j] /= ps
    return filtered, predicted, loglik, -1


@njit(cache=True)
def smoother_kernel(filtered, predicted, P):
    """Backward recursion; returns (smoothed, pairwise, flag).

    flag: 0 clean, 1 if the predicted probabilities needed the 1e-300 floor,
    -1 if the recursion degenerated to all-zero mass at some period.
    """
    T, K = filtered.shape
    smoothed = np.zeros((T, K))
    n_pair = T - 1 if T > 1 else 0
    pairwise = np.zeros((n_pair, K, K))
    flag = 0
    for k in range(K):
        smoothed[T - 1, k] = filtered[T - 1, k]
    for t in range(T - 2, -1, -1):
        total = 0.0
        for i in range(K):
            si = 0.0
            for j in range(K):
                denom = predicted[t + 1, j]
                if denom < 1e-300:
                    denom = 1e-300
                    flag = 1
                v = filtered[t, i] * P[i, j] * smoothed[t + 1, j] / denom
                pairwise[t, i, j] = v
                si += v
            smoothed[t, i] = si
            total += si
        if total <= 0.0:
            return smoothed, pairwise, -1
        for i in range(K):
            smoothed[t, i] /= total
            for j in range(K):
                pairwise[t, i, j] /= total
    return smoothed, pairwise, flag

"""Numba ``@njit`` kernel implementations (default backend).

Loops exploit the lower-triangular structure of the precision Cholesky
factors.  ``cache=True`` persists compiled code across processes so the
JIT cost is paid once per machine, not once per run.  ``fastmath`` stays
off: kernel output must be deterministic and reproducible bit for bit.
"""

import numpy as np
from numba import njit

_LOG_2PI = np.log(2.0 * np.pi)


@njit(cache=True)
def log_gaussians(x, means, prec_chols, log_det_prec):
    n, dim = x.shape
    n_comp = means.shape[0]
    out = np.empty((n, n_comp))
    const = -0.5 * dim * _LOG_2PI
    for i in range(n):
        for k in range(n_comp):
            acc = 0.0
            for a in range(dim):
                t = 0.0
                for b in range(a + 1):
                    t += prec_chols[k, a, b] * (x[i, b] - means[k, b])
                acc += t * t
            out[i, k] = const + log_det_prec[k] - 0.5 * acc
    return out


@njit(cache=True)
def pair_min_mahalanobis(y1, y2, prec_chols):
    n_comp, dim = prec_chols.shape[:2]
    best = np.inf
    for k in range(n_comp):
        acc = 0.0
        for a in range(dim):
            t = 0.0
            for b in range(a + 1):
                t += prec_chols[k, a, b] * (y1[b] - y2[b])
            acc += t * t
        d = np.sqrt(acc)
        if d < best:
            best = d
    return best


@njit(cache=True)
def pairwise_min_mahalanobis(y, prec_chols):
    n = y.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = pair_min_mahalanobis(y[i], y[j], prec_chols)
            out[i, j] = d
            out[j, i] = d
    return out

"""Numeric kernels with switchable numba / pure-numpy backends.

The hot inner loops of the package live here: batched Gaussian
log-density evaluation (used by EM training and by scoring) and
pairwise Mahalanobis distances (used by the distance-matrix export).
Two interchangeable implementations exist:

* ``numba`` -- ``@njit``-compiled loops (the default when numba imports)
* ``numpy`` -- pure-numpy fallback, no compilation step

Selection happens once at import time from the ``TWFR_GMM_BACKEND``
environment variable (``numba``, ``numpy`` or ``auto``); tests and the
benchmark script may switch at runtime via :func:`use_backend`.

Both backends satisfy the same contract: ``pairwise_min_mahalanobis``
entry (i, j) is produced by exactly the same floating-point operation
sequence as ``pair_min_mahalanobis(y[i], y[j], ...)``, so a matrix and a
per-pair double loop agree bit for bit within one backend.
"""

import os
import warnings

from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}

try:
    from . import numba_backend

    _BACKENDS["numba"] = numba_backend
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    numba_backend = None

_ENV_VAR = "TWFR_GMM_BACKEND"


def _pick_default():
    requested = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if requested in ("", "auto"):
        return "numba" if "numba" in _BACKENDS else "numpy"
    if requested not in _BACKENDS:
        warnings.warn(
            f"{_ENV_VAR}={requested!r} unavailable, falling back to numpy",
            stacklevel=2,
        )
        return "numpy"
    return requested


_active_name = _pick_default()
_active = _BACKENDS[_active_name]


def available_backends():
    """Names of importable backends."""
    return sorted(_BACKENDS)


def active_backend():
    """Name of the backend currently answering kernel calls."""
    return _active_name


def use_backend(name):
    """Switch the active backend; returns the previous backend name."""
    global _active, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    previous = _active_name
    _active_name = name
    _active = _BACKENDS[name]
    return previous


def log_gaussians(x, means, prec_chols, log_det_prec):
    """Log-density of each row of ``x`` under each Gaussian component.

    ``prec_chols[k]`` is the lower-triangular inverse of the Cholesky
    factor of the k-th covariance (so ``Sigma_k^-1 = L_k^T L_k``) and
    ``log_det_prec[k] = sum(log(diag(L_k)))``.  Returns an (n, K) array.
    """
    return _active.log_gaussians(x, means, prec_chols, log_det_prec)


def pair_min_mahalanobis(y1, y2, prec_chols):
    """min_k ||L_k (y1 - y2)||_2 for a single vector pair."""
    return _active.pair_min_mahalanobis(y1, y2, prec_chols)


def pairwise_min_mahalanobis(y, prec_chols):
    """Symmetric (n, n) matrix of pairwise min-over-component distances."""
    return _active.pairwise_min_mahalanobis(y, prec_chols)


def warm_up():
    """Trigger JIT compilation of the numba kernels on tiny inputs.

    No effect on the numpy backend.  Useful before timing-sensitive code.
    """
    import numpy as np

    x = np.zeros((2, 3))
    means = np.zeros((1, 3))
    chols = np.eye(3)[None, :, :]
    logdet = np.zeros(1)
    log_gaussians(x, means, chols, logdet)
    pair_min_mahalanobis(x[0], x[1], chols)
    pairwise_min_mahalanobis(x, chols)

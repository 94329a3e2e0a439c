"""Synthetic oversampling of scarce target-domain feature vectors.

Classic SMOTE interpolation: each synthetic vector sits uniformly at
random on the segment between a randomly drawn original and one of its
k nearest Euclidean neighbors.  Used to balance the handful of
target-domain training clips against the source domain before fitting
a mixture model.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class SmoteOptions:
    k_neighbors: int = 5
    target_count: int = 0
    seed: int = 0

    def validate(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


def smote_oversample(features, opts: SmoteOptions, u_override=None) -> np.ndarray:
    """Grow ``features`` to ``opts.target_count`` rows.

    The originals are returned verbatim as the first rows.  Each
    synthetic row is ``x + u * (nn - x)`` with ``x`` a seeded-random
    original, ``nn`` one of its k nearest neighbors (k clamped to
    ``n - 1``) and ``u`` uniform on [0, 1].  ``u_override`` pins ``u``
    to a constant, for tests.
    """
    opts.validate()
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 feature vectors to interpolate")
    n = x.shape[0]
    if opts.target_count < n:
        raise ValueError(
            f"target_count={opts.target_count} below current count {n}"
        )
    if opts.target_count == n:
        return x.copy()

    k = min(opts.k_neighbors, n - 1)
    d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    # stable argsort keeps neighbor order deterministic under ties
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(opts.seed)
    out = np.empty((opts.target_count, x.shape[1]))
    out[:n] = x
    for row in range(n, opts.target_count):
        i = int(rng.integers(n))
        j = int(neighbors[i, rng.integers(k)])
        u = float(rng.random()) if u_override is None else float(u_override)
        out[row] = x[i] + u * (x[j] - x[i])
    return out

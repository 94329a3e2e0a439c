"""Rank-weighted temporal pooling of log-Mel spectrograms.

Each frequency band is sorted over time in descending order and reduced
to a scalar by a geometric weight vector ``[r^0, r^1, ...] / z`` with
``z = sum_n r^(n-1)``.  The exponent base ``r`` interpolates between the
two classic statistics: ``r = 0`` reproduces the per-band maximum
(``0^0`` is taken as 1) and ``r = 1`` the per-band mean.  Intermediate
values emphasize the loudest frames without discarding the rest, which
is what separates short transient anomalies from stationary machine
noise once a Gaussian model is fit on the pooled vectors.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import LogMelSpectrogram


@dataclass(frozen=True)
class PoolingVector:
    """Normalized geometric weights for one choice of ``r`` and frame count."""

    weights: np.ndarray
    r: float
    z: float


def pooling_vector(r: float, n_frames: int) -> PoolingVector:
    """Build the weight vector ``[r^0, ..., r^(N-1)] / z``.

    The normalizer ``z`` is evaluated by direct summation rather than
    the closed-form geometric sum, which is 0/0 at ``r = 1``.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must lie in [0, 1], got {r}")
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    powers = np.ones(n_frames)
    if n_frames > 1:
        powers[1:] = np.power(r, np.arange(1, n_frames, dtype=np.float64))
    z = float(np.sum(powers))
    return PoolingVector(weights=powers / z, r=float(r), z=z)


def _as_matrix(spec) -> np.ndarray:
    if isinstance(spec, LogMelSpectrogram):
        return spec.values
    return np.asarray(spec, dtype=np.float64)


def row_descending_sort(spec) -> np.ndarray:
    """Sort each row into nonincreasing order; the input is left intact."""
    x = _as_matrix(spec)
    return np.sort(x, axis=1)[:, ::-1]


def pool_sorted(sorted_rows: np.ndarray, pooling: PoolingVector) -> np.ndarray:
    """Weighted reduction of already row-sorted data (grid-search fast path)."""
    if sorted_rows.shape[1] != pooling.weights.shape[0]:
        raise ValueError(
            f"pooling vector has {pooling.weights.shape[0]} weights but data has "
            f"{sorted_rows.shape[1]} frames"
        )
    return sorted_rows @ pooling.weights


def gwrp(spec, r: float) -> np.ndarray:
    """Pooled representation: one value per frequency band.

    Every output entry is a convex combination of that band's frame
    values, so it lies within [row min, row max].
    """
    x = _as_matrix(spec)
    return pool_sorted(row_descending_sort(x), pooling_vector(r, x.shape[1]))

"""Full-covariance Gaussian mixtures for normal-sound modeling.

Models are fit by EM on pooled spectral feature vectors.  Anomaly
scoring uses the negative log-density of the best-matching component
(mixture weights excluded by default; a flag adds them back for
ablation), and a min-over-components Mahalanobis metric supports the
distance-matrix export consumed by external embedding tools.

All randomness flows from the seed in :class:`FitOptions`; a fixed seed
yields a bit-identical model for a given kernel backend.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from . import kernels

_MODEL_FORMAT = "twfr-gmm-model"
_MODEL_VERSION = 1


@dataclass
class FitOptions:
    """EM hyperparameters.

    Defaults mirror the common toolkit conventions: a small diagonal
    ridge on every covariance, convergence on the change in mean
    log-likelihood, and k-means++-style seeding.
    """

    k: int = 1
    reg_covar: float = 1e-6
    tol: float = 1e-3
    max_iter: int = 100
    n_init: int = 1
    seed: int = 0

    def validate(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.reg_covar < 0:
            raise ValueError("reg_covar must be >= 0")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")


@dataclass
class GmmModel:
    """Fitted mixture: simplex weights, means, SPD covariances.

    ``prec_chols`` caches the lower-triangular inverse Cholesky factor
    of each covariance (``Sigma_k^-1 = L_k^T L_k``) and ``log_det_prec``
    its log-determinant contribution; both are derived, not stored on
    disk.  ``log_likelihood_curve`` holds the per-iteration mean train
    log-likelihood of the selected EM run (None on loaded models).
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    prec_chols: np.ndarray
    log_det_prec: np.ndarray
    log_likelihood_curve: np.ndarray | None = None

    @classmethod
    def from_parameters(cls, weights, means, covariances, log_likelihood_curve=None):
        weights = np.asarray(weights, dtype=np.float64)
        means = np.asarray(means, dtype=np.float64)
        covariances = np.asarray(covariances, dtype=np.float64)
        if weights.ndim != 1 or means.ndim != 2 or covariances.ndim != 3:
            raise ValueError("expected shapes (K,), (K, M), (K, M, M)")
        k, dim = means.shape
        if weights.shape != (k,) or covariances.shape != (k, dim, dim):
            raise ValueError("inconsistent parameter shapes")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-8:
            raise ValueError("weights must be positive and sum to 1")
        if not np.allclose(covariances, np.swapaxes(covariances, 1, 2), atol=1e-8):
            raise ValueError("covariances must be symmetric")
        prec_chols, log_det_prec = _precision_cholesky(covariances)
        return cls(weights, means, covariances, prec_chols, log_det_prec,
                   log_likelihood_curve)

    @property
    def k(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _precision_cholesky(covariances):
    """Lower-triangular factors L_k with Sigma_k^-1 = L_k^T L_k."""
    n_comp, dim = covariances.shape[:2]
    prec_chols = np.empty_like(covariances)
    log_det = np.empty(n_comp)
    eye = np.eye(dim)
    for k in range(n_comp):
        try:
            chol = np.linalg.cholesky(covariances[k])
        except np.linalg.LinAlgError as exc:
            raise ValueError(
                f"component {k} covariance is not positive definite "
                "(degenerate data? increase reg_covar)"
            ) from exc
        prec_chols[k] = solve_triangular(chol, eye, lower=True)
        log_det[k] = np.sum(np.log(np.diag(prec_chols[k])))
    return prec_chols, log_det


def _check_features(features, name="features"):
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty (n, dim) array")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contain non-finite values")
    return x


def _kmeanspp_centers(x, k, rng):
    """k-means++ seeding: first center uniform, then D^2 sampling."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[c] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centers[c]) ** 2, axis=1))
    return centers


def _m_step(x, resp, reg_covar):
    n, dim = x.shape
    nk = resp.sum(axis=0)
    if np.any(nk <= 0):
        raise ValueError("a mixture component lost all responsibility during EM")
    weights = nk / n
    means = resp.T @ x / nk[:, None]
    covariances = np.empty((resp.shape[1], dim, dim))
    for k in range(resp.shape[1]):
        diff = x - means[k]
        cov = (resp[:, k, None] * diff).T @ diff / nk[k]
        cov = 0.5 * (cov + cov.T)
        cov.flat[:: dim + 1] += reg_covar
        covariances[k] = cov
    return weights, means, covariances


def _e_step(x, weights, prec_chols, log_det_prec, means):
    log_dens = kernels.log_gaussians(x, means, prec_chols, log_det_prec)
    weighted = log_dens + np.log(weights)
    log_norm = logsumexp(weighted, axis=1)
    resp = np.exp(weighted - log_norm[:, None])
    return float(np.mean(log_norm)), resp


def _em_single(x, opts: FitOptions, rng):
    centers = _kmeanspp_centers(x, opts.k, rng)
    d2 = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    resp = np.zeros((x.shape[0], opts.k))
    resp[np.arange(x.shape[0]), np.argmin(d2, axis=1)] = 1.0

    weights, means, covariances = _m_step(x, resp, opts.reg_covar)
    history = []
    for _ in range(opts.max_iter):
        prec_chols, log_det_prec = _precision_cholesky(covariances)
        mean_ll, resp = _e_step(x, weights, prec_chols, log_det_prec, means)
        history.append(mean_ll)
        if len(history) > 1 and abs(history[-1] - history[-2]) < opts.tol:
            break
        weights, means, covariances = _m_step(x, resp, opts.reg_covar)
    return weights, means, covariances, np.asarray(history)


def fit_gmm(features, opts: FitOptions) -> GmmModel:
    """Fit a full-covariance mixture by EM.

    Runs ``opts.n_init`` restarts from distinct k-means++ seedings and
    keeps the run with the best final mean log-likelihood.  Raises when
    there are fewer samples than components or when the (regularized)
    covariance of a component is singular.
    """
    opts.validate()
    x = _check_features(features)
    if x.shape[0] < opts.k:
        raise ValueError(
            f"need at least k={opts.k} samples to fit, got {x.shape[0]}"
        )
    master = np.random.default_rng(opts.seed)
    best = None
    for child in master.spawn(opts.n_init):
        weights, means, covariances, history = _em_single(x, opts, child)
        if best is None or history[-1] > best[3][-1]:
            best = (weights, means, covariances, history)
    weights, means, covariances, history = best
    return GmmModel.from_parameters(weights, means, covariances, history)


def component_log_density(model: GmmModel, k: int, x) -> float:
    """Log-density of ``x`` under component ``k`` (0-based index)."""
    if not 0 <= k < model.k:
        raise IndexError(f"component index {k} out of range [0, {model.k})")
    x = _check_vector(model, x)
    out = kernels.log_gaussians(
        x[None, :], model.means[k : k + 1], model.prec_chols[k : k + 1],
        model.log_det_prec[k : k + 1],
    )
    return float(out[0, 0])


def anomaly_score(model: GmmModel, x, include_component_weight=False) -> float:
    """Negative best-component log-density; higher means more anomalous.

    With ``include_component_weight`` the mixture weight enters as
    ``log pi_k`` before taking the max.
    """
    x = _check_vector(model, x)
    log_dens = kernels.log_gaussians(
        x[None, :], model.means, model.prec_chols, model.log_det_prec
    )[0]
    if include_component_weight:
        log_dens = log_dens + np.log(model.weights)
    return float(-np.max(log_dens))


def score_samples(model: GmmModel, features, include_component_weight=False):
    """Vector of anomaly scores for an (n, dim) feature batch."""
    x = _check_features(features)
    if x.shape[1] != model.dim:
        raise ValueError(f"feature dim {x.shape[1]} != model dim {model.dim}")
    log_dens = kernels.log_gaussians(
        x, model.means, model.prec_chols, model.log_det_prec
    )
    if include_component_weight:
        log_dens = log_dens + np.log(model.weights)
    return -np.max(log_dens, axis=1)


def mahalanobis_metric(model: GmmModel, y1, y2) -> float:
    """min over components of sqrt((y1-y2)^T Sigma_k^-1 (y1-y2))."""
    y1 = _check_vector(model, y1)
    y2 = _check_vector(model, y2)
    return float(kernels.pair_min_mahalanobis(y1, y2, model.prec_chols))


def distance_matrix(model: GmmModel, features) -> np.ndarray:
    """All pairwise :func:`mahalanobis_metric` values; zero diagonal."""
    x = _check_features(features)
    if x.shape[1] != model.dim:
        raise ValueError(f"feature dim {x.shape[1]} != model dim {model.dim}")
    return kernels.pairwise_min_mahalanobis(x, model.prec_chols)


def _check_vector(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ValueError(f"expected a vector of dim {model.dim}, got shape {x.shape}")
    return x


def save_gmm(model: GmmModel, path, extra_meta=None):
    """Write a model as a JSON header line plus little-endian float64 blocks.

    The binary payload is ``weights``, ``means``, ``covariances`` in C
    order; round-tripping through :func:`load_gmm` is bit-exact.
    """
    header = {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "k": model.k,
        "dim": model.dim,
        "dtype": "<f8",
        "meta": extra_meta or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for arr in (model.weights, model.means, model.covariances):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_gmm(path) -> GmmModel:
    """Inverse of :func:`save_gmm`; caches are recomputed on load."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"not a model file: {path}") from exc
    if header.get("format") != _MODEL_FORMAT:
        raise ValueError(f"not a model file: {path}")
    if header.get("version") != _MODEL_VERSION:
        raise ValueError(
            f"unsupported model version {header.get('version')} in {path}"
        )
    k, dim = header["k"], header["dim"]
    sizes = {"weights": k, "means": k * dim, "covariances": k * dim * dim}
    expected = sum(sizes.values()) * 8
    if len(payload) != expected:
        raise ValueError(
            f"model payload is {len(payload)} bytes, expected {expected}: {path}"
        )
    offset = 0
    arrays = {}
    for name, count in sizes.items():
        arrays[name] = np.frombuffer(
            payload, dtype="<f8", count=count, offset=offset
        ).astype(np.float64)
        offset += count * 8
    return GmmModel.from_parameters(
        arrays["weights"],
        arrays["means"].reshape(k, dim),
        arrays["covariances"].reshape(k, dim, dim),
    )

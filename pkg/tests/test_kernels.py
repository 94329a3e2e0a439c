"""Backend dispatch and numba/numpy agreement."""

import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twfr_gmm import kernels


def _random_inputs(seed, n=40, dim=6, k=2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, dim))
    means = rng.normal(size=(k, dim))
    prec_chols = np.empty((k, dim, dim))
    log_det = np.empty(k)
    for i in range(k):
        a = rng.normal(size=(dim, dim))
        cov = a @ a.T + dim * np.eye(dim)
        chol = np.linalg.cholesky(cov)
        prec = np.linalg.inv(chol)
        prec_chols[i] = np.tril(prec)
        log_det[i] = np.sum(np.log(np.diag(prec)))
    return x, means, prec_chols, log_det


@pytest.fixture
def both_backends():
    if "numba" not in kernels.available_backends():
        pytest.skip("numba backend unavailable")
    return ("numba", "numpy")


class TestDispatch:
    def test_active_is_known(self):
        assert kernels.active_backend() in kernels.available_backends()

    def test_use_backend_round_trip(self):
        start = kernels.active_backend()
        other = "numpy" if start != "numpy" else sorted(kernels.available_backends())[0]
        previous = kernels.use_backend(other)
        assert previous == start
        assert kernels.active_backend() == other
        kernels.use_backend(start)
        assert kernels.active_backend() == start

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError, match="unknown backend"):
            kernels.use_backend("fortran")

    def test_env_var_selects_numpy(self):
        code = ("import twfr_gmm.kernels as k; print(k.active_backend())")
        out = subprocess.run(
            [sys.executable, "-c", code],
            env={**os.environ, "TWFR_GMM_BACKEND": "numpy"},
            capture_output=True, text=True, check=True,
        )
        assert out.stdout.strip() == "numpy"

    def test_env_var_unknown_warns_and_falls_back(self):
        code = (
            "import warnings; warnings.simplefilter('always');\n"
            "import twfr_gmm.kernels as k; print(k.active_backend())"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            env={**os.environ, "TWFR_GMM_BACKEND": "cuda"},
            capture_output=True, text=True, check=True,
        )
        assert out.stdout.strip() == "numpy"
        assert "falling back" in out.stderr


class TestBackendAgreement:
    def test_log_gaussians_close(self, both_backends):
        x, means, chols, logdet = _random_inputs(0)
        results = {}
        for name in both_backends:
            prev = kernels.use_backend(name)
            try:
                results[name] = kernels.log_gaussians(x, means, chols, logdet)
            finally:
                kernels.use_backend(prev)
        assert_allclose(results["numba"], results["numpy"], rtol=1e-12, atol=1e-12)

    def test_pairwise_close(self, both_backends):
        x, _, chols, _ = _random_inputs(1, n=25)
        results = {}
        for name in both_backends:
            prev = kernels.use_backend(name)
            try:
                results[name] = kernels.pairwise_min_mahalanobis(x, chols)
            finally:
                kernels.use_backend(prev)
        assert_allclose(results["numba"], results["numpy"], rtol=1e-12, atol=1e-12)

    def test_matrix_matches_pair_calls_bitwise(self):
        """Within one backend the matrix and the scalar routine agree exactly."""
        x, _, chols, _ = _random_inputs(2, n=12)
        for name in kernels.available_backends():
            prev = kernels.use_backend(name)
            try:
                matrix = kernels.pairwise_min_mahalanobis(x, chols)
                for i in range(len(x)):
                    for j in range(len(x)):
                        if i == j:
                            assert matrix[i, j] == 0.0
                        else:
                            pair = kernels.pair_min_mahalanobis(x[i], x[j], chols)
                            assert matrix[i, j] == pair
            finally:
                kernels.use_backend(prev)

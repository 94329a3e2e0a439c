"""Shared fixtures and synthetic-audio helpers for the test suite."""

from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile
from scipy.signal import lfilter

from twfr_gmm import kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay any JIT compilation cost once, outside timed tests
    kernels.warm_up()


def write_wav(path, samples, sample_rate=16000):
    """Write float samples in [-1, 1] as a PCM16 WAV file."""
    data = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    wavfile.write(path, sample_rate, np.round(data * 32767.0).astype(np.int16))


def filtered_noise(rng, n, cutoff=0.2, gain=1.0):
    """Stationary low-passed noise; cutoff in (0, 1) sets the color."""
    white = rng.normal(0.0, 0.1, n)
    return gain * lfilter([cutoff], [1.0, -(1.0 - cutoff)], white)


def add_bursts(rng, samples, n_bursts=3, width=560, amplitude=0.6):
    """Overlay short wideband transients at random positions."""
    out = np.asarray(samples, dtype=np.float64).copy()
    envelope = np.hanning(width)
    for _ in range(n_bursts):
        pos = int(rng.integers(0, len(out) - width))
        out[pos:pos + width] += amplitude * envelope * rng.normal(0.0, 1.0, width)
    return out


def synth_dataset(root, machine="Widget", sections=(0, 1), n_train=8, n_test=4,
                  duration=1.0, sample_rate=16000, seed=7, gain_jitter_db=0.0,
                  n_bursts=3, burst_amplitude=0.6, n_target=2):
    """Create a small dataset in the <root>/<machine>/<split> layout.

    Normal clips are stationary filtered noise (per-section color);
    anomalies are the same noise plus short transient bursts.  With
    ``gain_jitter_db`` > 0 every clip gets a random broadband gain, which
    makes mean pooling noticeably worse than rank-weighted pooling.
    """
    rng = np.random.default_rng(seed)
    root = Path(root)
    n = int(duration * sample_rate)
    train_dir = root / machine / "train"
    test_dir = root / machine / "test"
    train_dir.mkdir(parents=True, exist_ok=True)
    test_dir.mkdir(parents=True, exist_ok=True)

    def gain():
        if gain_jitter_db <= 0:
            return 1.0
        return 10.0 ** (rng.normal(0.0, gain_jitter_db) / 20.0)

    for sec in sections:
        cutoff = 0.15 + 0.1 * sec
        for i in range(n_train):
            domain = "source" if i < n_train - n_target else "target"
            name = f"section_{sec:02d}_{domain}_train_normal_{i:04d}_syn.wav"
            write_wav(train_dir / name, filtered_noise(rng, n, cutoff, gain()),
                      sample_rate)
        for i in range(n_test):
            base = filtered_noise(rng, n, cutoff, gain())
            write_wav(test_dir / f"section_{sec:02d}_source_test_normal_{i:04d}_syn.wav",
                      base, sample_rate)
            base = filtered_noise(rng, n, cutoff, gain())
            bursty = add_bursts(rng, base, n_bursts, amplitude=burst_amplitude)
            write_wav(test_dir / f"section_{sec:02d}_source_test_anomaly_{i:04d}_syn.wav",
                      bursty, sample_rate)
    return root

"""Audio front end: WAV loading and log-Mel spectrogram extraction.

The framing rule is deliberately simple and reproducible: frames start
at sample 0, advance by ``hop_size``, and a trailing partial frame is
dropped, so ``n_frames = (n_samples - window_size) // hop_size + 1``.
No centering, no zero padding.  Mel filters use the Slaney scale
(linear below 1 kHz, logarithmic above) with area normalization, and
log compression is decibels with a floor that keeps every entry finite.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.io import wavfile


class AudioReadError(RuntimeError):
    """A WAV file could not be read or decoded."""


class SpectrogramConfigError(ValueError):
    """Spectrogram parameters are inconsistent or unusable."""


_PCM16_SCALE = 32768.0
_WINDOWS = ("hann", "rectangular")


@dataclass
class AudioClip:
    """Mono waveform in [-1, 1] plus its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioClip requires a 1-D mono sample array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self):
        return self.samples.shape[0]


@dataclass
class SpectrogramConfig:
    """Front-end parameters.

    Defaults: 1024-sample window with 50% overlap and 128 Mel bands.
    ``window`` may be set to ``"rectangular"`` for diagnostic use.
    """

    window_size: int = 1024
    hop_size: int = 512
    n_mels: int = 128
    f_min: float = 0.0
    f_max: float = 8000.0
    log_floor: float = 1e-10
    window: str = "hann"

    def validate(self, sample_rate=None):
        if self.window_size < 1 or self.hop_size < 1:
            raise SpectrogramConfigError("window_size and hop_size must be >= 1")
        if self.hop_size > self.window_size:
            raise SpectrogramConfigError("hop_size must not exceed window_size")
        if self.n_mels < 1:
            raise SpectrogramConfigError("n_mels must be >= 1")
        if not 0.0 <= self.f_min < self.f_max:
            raise SpectrogramConfigError("need 0 <= f_min < f_max")
        if self.log_floor <= 0.0:
            raise SpectrogramConfigError("log_floor must be > 0")
        if self.window not in _WINDOWS:
            raise SpectrogramConfigError(f"window must be one of {_WINDOWS}")
        if sample_rate is not None and self.f_max > sample_rate / 2:
            raise SpectrogramConfigError(
                f"f_max={self.f_max} above Nyquist for sample_rate={sample_rate}"
            )


@dataclass
class LogMelSpectrogram:
    """Matrix of log Mel-band energies, shape (n_mels, n_frames)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("LogMelSpectrogram values must be 2-D")

    @property
    def n_mels(self):
        return self.values.shape[0]

    @property
    def n_frames(self):
        return self.values.shape[1]


def load_wav(path) -> AudioClip:
    """Read a RIFF/WAVE file into a normalized mono AudioClip.

    Accepts PCM16 and IEEE-float (32/64-bit) sample formats.  Multi-
    channel input is averaged down to mono.  PCM16 samples are scaled
    by 1/32768 so the output always lies in [-1, 1].
    """
    try:
        sample_rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise AudioReadError(f"unreadable file: {path} ({exc})") from exc

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / _PCM16_SCALE
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise AudioReadError(
            f"unsupported codec in {path}: dtype {data.dtype}, expected PCM16 or IEEE float"
        )

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise AudioReadError(f"zero-length audio: {path}")
    if not np.all(np.isfinite(samples)):
        raise AudioReadError(f"non-finite samples in {path}")
    return AudioClip(samples=samples, sample_rate=int(sample_rate))


def frame_count(n_samples: int, cfg: SpectrogramConfig) -> int:
    """Number of analysis frames for a clip of ``n_samples`` samples."""
    if n_samples < cfg.window_size:
        raise ValueError(
            f"clip of {n_samples} samples is shorter than one window "
            f"({cfg.window_size} samples)"
        )
    return (n_samples - cfg.window_size) // cfg.hop_size + 1


def _window_values(cfg: SpectrogramConfig) -> np.ndarray:
    n = cfg.window_size
    if cfg.window == "rectangular":
        return np.ones(n)
    # periodic Hann, the STFT convention
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def power_spectrogram(clip: AudioClip, cfg: SpectrogramConfig) -> np.ndarray:
    """Windowed STFT power, shape (window_size // 2 + 1, n_frames)."""
    cfg.validate(clip.sample_rate)
    n_frames = frame_count(len(clip), cfg)
    frames = sliding_window_view(clip.samples, cfg.window_size)[:: cfg.hop_size]
    frames = frames[:n_frames] * _window_values(cfg)
    spectrum = np.fft.rfft(frames, axis=1)
    return (spectrum.real**2 + spectrum.imag**2).T


def mel_filterbank(sample_rate, window_size, n_mels, f_min, f_max) -> np.ndarray:
    """Triangular Slaney-scale Mel filterbank.

    Returns an (n_mels, window_size // 2 + 1) nonnegative matrix.  Each
    filter is scaled by 2 / (upper edge - lower edge in Hz) so that all
    filters carry equal area.  Raises if any filter would be entirely
    zero (more bands than the FFT resolution supports).
    """
    if not 0.0 <= f_min < f_max <= sample_rate / 2:
        raise SpectrogramConfigError("need 0 <= f_min < f_max <= sample_rate / 2")
    n_bins = window_size // 2 + 1
    fft_freqs = np.arange(n_bins) * (sample_rate / window_size)
    hz_pts = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))

    fdiff = np.diff(hz_pts)
    ramps = hz_pts[:, None] - fft_freqs[None, :]
    lower = -ramps[:-2] / fdiff[:-1, None]
    upper = ramps[2:] / fdiff[1:, None]
    weights = np.maximum(0.0, np.minimum(lower, upper))
    weights *= (2.0 / (hz_pts[2:] - hz_pts[:n_mels]))[:, None]

    empty = ~weights.any(axis=1)
    if empty.any():
        raise SpectrogramConfigError(
            f"{int(empty.sum())} of {n_mels} Mel filters are entirely zero; "
            "reduce n_mels or enlarge the window"
        )
    return weights


def hz_to_mel(freq_hz):
    """Slaney Mel scale: linear below 1 kHz, logarithmic above."""
    freq_hz = np.asarray(freq_hz, dtype=np.float64)
    f_sp = 200.0 / 3
    min_log_hz = 1000.0
    logstep = np.log(6.4) / 27.0
    linear = freq_hz / f_sp
    with np.errstate(divide="ignore"):
        log_branch = min_log_hz / f_sp + np.log(
            np.maximum(freq_hz, min_log_hz) / min_log_hz
        ) / logstep
    return np.where(freq_hz >= min_log_hz, log_branch, linear)


def mel_to_hz(mels):
    """Inverse of :func:`hz_to_mel`."""
    mels = np.asarray(mels, dtype=np.float64)
    f_sp = 200.0 / 3
    min_log_hz = 1000.0
    min_log_mel = min_log_hz / f_sp
    logstep = np.log(6.4) / 27.0
    linear = mels * f_sp
    log_branch = min_log_hz * np.exp(logstep * (np.maximum(mels, min_log_mel) - min_log_mel))
    return np.where(mels >= min_log_mel, log_branch, linear)


def log_mel(clip: AudioClip, cfg: SpectrogramConfig) -> LogMelSpectrogram:
    """Log-Mel spectrogram in dB: 10*log10(max(mel_power, log_floor))."""
    power = power_spectrogram(clip, cfg)
    fb = mel_filterbank(clip.sample_rate, cfg.window_size, cfg.n_mels, cfg.f_min, cfg.f_max)
    mel_power = fb @ power
    return LogMelSpectrogram(10.0 * np.log10(np.maximum(mel_power, cfg.log_floor)))

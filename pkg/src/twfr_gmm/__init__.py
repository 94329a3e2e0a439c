"""Time-weighted frequency representations with Gaussian mixture scoring.

Unsupervised anomalous sound detection: log-Mel spectrograms are pooled
over time by global weighted ranking pooling into one vector per clip,
a full-covariance Gaussian mixture is fit on normal clips per machine
section, and the negative best-component log-density is the anomaly
score.  See the README for the CLI front end.
"""

__version__ = "0.1.0"

from .config import (
    DEFAULT_R,
    MACHINE_TYPES,
    ConfigError,
    MachineConfig,
    PipelineConfig,
    load_config,
    machine_config,
)
from .dataset import (
    ClipMetadata,
    DatasetError,
    FilenameError,
    LoadedSplit,
    load_split,
    parse_filename,
    scan_split,
)
from .dsp import (
    AudioClip,
    AudioReadError,
    LogMelSpectrogram,
    SpectrogramConfig,
    SpectrogramConfigError,
    hz_to_mel,
    load_wav,
    log_mel,
    mel_filterbank,
    mel_to_hz,
    power_spectrogram,
)
from .gmm import (
    FitOptions,
    GmmModel,
    anomaly_score,
    component_log_density,
    distance_matrix,
    fit_gmm,
    load_gmm,
    mahalanobis_metric,
    save_gmm,
    score_samples,
)
from .kernels import active_backend, available_backends, use_backend
from .metrics import (
    EvalReport,
    EvalRow,
    aggregate,
    auc,
    pauc,
    write_report_csv,
    write_report_json,
)
from .pipeline import (
    GridSearchResult,
    derive_seed,
    evaluate_scores,
    export_distances,
    fit_machine,
    grid_search_r,
    load_bundle,
    read_scores_csv,
    score_clips,
    score_machine,
    train_section,
    write_scores_csv,
)
from .smote import SmoteOptions, smote_oversample
from .twfr import PoolingVector, gwrp, pool_sorted, pooling_vector, row_descending_sort

__all__ = [
    "__version__",
    "AudioClip",
    "AudioReadError",
    "ClipMetadata",
    "ConfigError",
    "DEFAULT_R",
    "DatasetError",
    "EvalReport",
    "EvalRow",
    "FilenameError",
    "FitOptions",
    "GmmModel",
    "GridSearchResult",
    "LoadedSplit",
    "LogMelSpectrogram",
    "MACHINE_TYPES",
    "MachineConfig",
    "PipelineConfig",
    "PoolingVector",
    "SmoteOptions",
    "SpectrogramConfig",
    "SpectrogramConfigError",
    "active_backend",
    "aggregate",
    "anomaly_score",
    "auc",
    "available_backends",
    "component_log_density",
    "derive_seed",
    "distance_matrix",
    "evaluate_scores",
    "export_distances",
    "fit_gmm",
    "fit_machine",
    "grid_search_r",
    "gwrp",
    "hz_to_mel",
    "load_bundle",
    "load_config",
    "load_gmm",
    "load_split",
    "load_wav",
    "log_mel",
    "machine_config",
    "mahalanobis_metric",
    "mel_filterbank",
    "mel_to_hz",
    "parse_filename",
    "pauc",
    "pool_sorted",
    "pooling_vector",
    "power_spectrogram",
    "read_scores_csv",
    "row_descending_sort",
    "save_gmm",
    "scan_split",
    "score_clips",
    "score_machine",
    "score_samples",
    "smote_oversample",
    "train_section",
    "use_backend",
    "write_report_csv",
    "write_report_json",
    "write_scores_csv",
]

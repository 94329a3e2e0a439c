"""Run configuration: per-machine parameters and the YAML config file.

Each machine type gets its own pooling exponent ``r``, mixture size,
front-end settings, and optional oversampling block.  The built-in
``r`` table carries the tuned per-machine values; a config file may
override any field globally (``defaults`` block) or per machine.
Unknown keys anywhere in the file are rejected outright.
"""

from dataclasses import dataclass, field, replace

import yaml

from .dsp import SpectrogramConfig

# tuned pooling exponent per machine type; unknown machines fall back to 1.0
DEFAULT_R = {
    "ToyCar": 0.99,
    "ToyTrain": 0.81,
    "Fan": 1.00,
    "Gearbox": 0.99,
    "Bearing": 1.00,
    "Slider": 0.88,
    "Valve": 0.45,
}

MACHINE_TYPES = tuple(DEFAULT_R)


class ConfigError(ValueError):
    """The config file is malformed or contains unknown keys."""


@dataclass
class SmoteSettings:
    """Presence of this block enables target-domain oversampling.

    ``target_count`` defaults to the section's source-domain sample
    count so the two domains end up balanced.
    """

    k_neighbors: int = 5
    target_count: int | None = None


@dataclass
class MachineConfig:
    r: float
    k: int = 1
    spectrogram: SpectrogramConfig = field(default_factory=SpectrogramConfig)
    smote: SmoteSettings | None = None
    include_component_weight: bool = False

    def validate(self):
        if not 0.0 <= self.r <= 1.0:
            raise ConfigError(f"r must lie in [0, 1], got {self.r}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        self.spectrogram.validate()


@dataclass
class PipelineConfig:
    seed: int = 0
    pauc_fpr: float = 0.1
    defaults: dict = field(default_factory=dict)
    machines: dict = field(default_factory=dict)


_TOP_KEYS = {"seed", "pauc_fpr", "defaults", "machines"}
_MACHINE_KEYS = {"r", "k", "spectrogram", "smote", "include_component_weight"}
_SPECTROGRAM_KEYS = {
    "window_size", "hop_size", "n_mels", "f_min", "f_max", "log_floor", "window",
}
_SMOTE_KEYS = {"k_neighbors", "target_count"}


def _reject_unknown(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {where}: {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _check_machine_block(block, where):
    _reject_unknown(block, _MACHINE_KEYS, where)
    if "spectrogram" in block and block["spectrogram"] is not None:
        _reject_unknown(block["spectrogram"], _SPECTROGRAM_KEYS, f"{where}.spectrogram")
    if "smote" in block and block["smote"] is not None:
        _reject_unknown(block["smote"], _SMOTE_KEYS, f"{where}.smote")


def load_config(path) -> PipelineConfig:
    """Parse and structurally validate a YAML config file.

    ``None`` yields the built-in defaults.
    """
    if path is None:
        return PipelineConfig()
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    _reject_unknown(raw, _TOP_KEYS, "config")
    defaults = raw.get("defaults") or {}
    _check_machine_block(defaults, "defaults")
    machines = raw.get("machines") or {}
    if not isinstance(machines, dict):
        raise ConfigError("machines must be a mapping of machine type to settings")
    for name, block in machines.items():
        _check_machine_block(block or {}, f"machines.{name}")
    return PipelineConfig(
        seed=int(raw.get("seed", 0)),
        pauc_fpr=float(raw.get("pauc_fpr", 0.1)),
        defaults=defaults,
        machines={name: (block or {}) for name, block in machines.items()},
    )


def _apply_block(cfg: MachineConfig, block) -> MachineConfig:
    if "r" in block:
        cfg = replace(cfg, r=float(block["r"]))
    if "k" in block:
        cfg = replace(cfg, k=int(block["k"]))
    if "include_component_weight" in block:
        cfg = replace(cfg, include_component_weight=bool(block["include_component_weight"]))
    if "spectrogram" in block:
        spec_block = block["spectrogram"] or {}
        cfg = replace(cfg, spectrogram=replace(cfg.spectrogram, **spec_block))
    if "smote" in block:
        if block["smote"] is None:
            cfg = replace(cfg, smote=None)
        else:
            base = cfg.smote or SmoteSettings()
            cfg = replace(cfg, smote=replace(base, **block["smote"]))
    return cfg


def machine_config(pipeline_cfg: PipelineConfig, machine: str, r_override=None) -> MachineConfig:
    """Resolve the effective settings for one machine type.

    Precedence, lowest to highest: built-in defaults (including the
    per-machine ``r`` table), the file's ``defaults`` block, the file's
    per-machine block, then an explicit ``r_override``.
    """
    cfg = MachineConfig(r=DEFAULT_R.get(machine, 1.0))
    cfg = _apply_block(cfg, pipeline_cfg.defaults)
    cfg = _apply_block(cfg, pipeline_cfg.machines.get(machine, {}))
    if r_override is not None:
        cfg = replace(cfg, r=float(r_override))
    cfg.validate()
    return cfg


def machine_config_from_dict(block) -> MachineConfig:
    """Rebuild a resolved config from its dict echo (manifest round trip)."""
    _check_machine_block(block, "machine config")
    if "r" not in block:
        raise ConfigError("machine config dict is missing 'r'")
    cfg = _apply_block(MachineConfig(r=float(block["r"])), block)
    cfg.validate()
    return cfg


def machine_config_as_dict(cfg: MachineConfig) -> dict:
    """Plain-dict echo of a resolved config, for manifests and model files."""
    out = {
        "r": cfg.r,
        "k": cfg.k,
        "include_component_weight": cfg.include_component_weight,
        "spectrogram": {
            "window_size": cfg.spectrogram.window_size,
            "hop_size": cfg.spectrogram.hop_size,
            "n_mels": cfg.spectrogram.n_mels,
            "f_min": cfg.spectrogram.f_min,
            "f_max": cfg.spectrogram.f_max,
            "log_floor": cfg.spectrogram.log_floor,
            "window": cfg.spectrogram.window,
        },
        "smote": None,
    }
    if cfg.smote is not None:
        out["smote"] = {
            "k_neighbors": cfg.smote.k_neighbors,
            "target_count": cfg.smote.target_count,
        }
    return out

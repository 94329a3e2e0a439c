"""End-to-end orchestration: train, score, search r, export distances.

A trained "bundle" is a directory of per-section mixture models plus a
JSON manifest.  Sections are modeled independently; every per-section
random stream is derived by hashing (seed, machine, section, purpose),
so results do not depend on processing order and a section's model is
unaffected by other sections' data.
"""

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import MachineConfig, machine_config_as_dict
from .dataset import ClipMetadata, scan_split
from .dsp import load_wav, log_mel
from .gmm import FitOptions, GmmModel, distance_matrix, fit_gmm, load_gmm, save_gmm, score_samples
from .metrics import aggregate, auc
from .smote import SmoteOptions, smote_oversample
from .twfr import pool_sorted, pooling_vector, row_descending_sort

log = logging.getLogger(__name__)

_BUNDLE_FORMAT = "twfr-gmm-bundle"
_BUNDLE_VERSION = 1
SCORE_CSV_HEADER = ["machine", "section", "domain", "split", "label", "clip_id", "score"]


def derive_seed(base_seed, *parts) -> int:
    """Stable sub-seed from a base seed and string parts (hash-based)."""
    digest = hashlib.sha256()
    digest.update(str(int(base_seed)).encode())
    for part in parts:
        digest.update(b"\x00" + str(part).encode())
    return int.from_bytes(digest.digest()[:8], "little") >> 1


def sorted_log_mel(clip, spectrogram_cfg) -> np.ndarray:
    """Row-sorted log-Mel matrix; the pooling-independent part of TWFR."""
    return row_descending_sort(log_mel(clip, spectrogram_cfg))


def _pool_all(sorted_mats, r):
    """Pool a list of row-sorted matrices, caching weights per frame count."""
    vectors = {}
    feats = np.empty((len(sorted_mats), sorted_mats[0].shape[0]))
    for i, mat in enumerate(sorted_mats):
        n = mat.shape[1]
        if n not in vectors:
            vectors[n] = pooling_vector(r, n)
        feats[i] = pool_sorted(mat, vectors[n])
    return feats


def clip_features(items, cfg: MachineConfig) -> np.ndarray:
    """TWFR vectors for (clip, metadata) pairs, in input order."""
    mats = [sorted_log_mel(clip, cfg.spectrogram) for clip, _ in items]
    return _pool_all(mats, cfg.r)


def _training_matrix(features, metas, cfg: MachineConfig, seed):
    """Source features, then target features, then any synthetic rows."""
    source = [f for f, m in zip(features, metas) if m.domain == "source"]
    target = [f for f, m in zip(features, metas) if m.domain == "target"]
    blocks = []
    if source:
        blocks.append(np.asarray(source))
    if target:
        target = np.asarray(target)
        if cfg.smote is not None and len(target) >= 2:
            count = cfg.smote.target_count
            if count is None:
                count = max(len(source), len(target))
            opts = SmoteOptions(
                k_neighbors=cfg.smote.k_neighbors,
                target_count=count,
                seed=derive_seed(seed, "smote"),
            )
            target = smote_oversample(target, opts)
        blocks.append(target)
    counts = {
        "n_source": len(source),
        "n_target": int(sum(1 for m in metas if m.domain == "target")),
    }
    matrix = np.vstack(blocks)
    counts["n_train"] = matrix.shape[0]
    return matrix, counts


def _fit_from_features(features, metas, cfg: MachineConfig, seed):
    matrix, counts = _training_matrix(features, metas, cfg, seed)
    opts = FitOptions(k=cfg.k, seed=derive_seed(seed, "gmm"))
    return fit_gmm(matrix, opts), counts


def train_section(items, cfg: MachineConfig, seed) -> GmmModel:
    """Fit one section's model from its (clip, metadata) training pairs.

    Features are pooled with the machine's ``r``; target-domain vectors
    are oversampled first when the config enables it.
    """
    metas = [meta for _, meta in items]
    model, _ = _fit_from_features(clip_features(items, cfg), metas, cfg, seed)
    return model


def score_clips(model: GmmModel, items, cfg: MachineConfig):
    """Anomaly score per clip, order preserved."""
    if not items:
        return []
    features = clip_features(items, cfg)
    scores = score_samples(model, features, cfg.include_component_weight)
    return [(meta, float(s)) for (_, meta), s in zip(items, scores)]


@dataclass
class GridSearchResult:
    best_r: float
    table: list  # (r, mean_auc) in grid order


def grid_search_r(train_items, val_items, grid, cfg: MachineConfig, seed) -> GridSearchResult:
    """Pick the pooling exponent with the best validation AUC.

    For each candidate ``r``, per-section models are trained and the
    labeled validation clips scored; the mean AUC over sections decides.
    Ties go to the larger ``r``.  Spectrograms are computed and sorted
    once, so the sweep only re-pools, refits, and rescores.
    """
    grid = [float(r) for r in grid]
    if not grid:
        raise ValueError("r grid must be nonempty")
    for r in grid:
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"grid value {r} outside [0, 1]")
    val_labels = [meta.label for _, meta in val_items]
    if "unknown" in val_labels:
        raise ValueError("validation clips must be labeled normal or anomaly")
    if len(set(val_labels)) < 2:
        raise ValueError("validation set needs both normal and anomalous clips")

    sections = sorted({meta.section for _, meta in train_items})
    by_section_train = {
        s: [(i, meta) for i, (_, meta) in enumerate(train_items) if meta.section == s]
        for s in sections
    }
    train_mats = [sorted_log_mel(clip, cfg.spectrogram) for clip, _ in train_items]
    val_mats = [sorted_log_mel(clip, cfg.spectrogram) for clip, _ in val_items]
    val_by_section = {
        s: [i for i, (_, meta) in enumerate(val_items) if meta.section == s]
        for s in sections
    }

    table = []
    best_r, best_auc = None, -np.inf
    for r in grid:
        r_cfg_features = _pool_all(train_mats, r)
        val_features = _pool_all(val_mats, r)
        section_aucs = []
        for s in sections:
            idx = [i for i, _ in by_section_train[s]]
            metas = [meta for _, meta in by_section_train[s]]
            model, _ = _fit_from_features(
                r_cfg_features[idx], metas, _with_r(cfg, r), derive_seed(seed, "section", s)
            )
            v_idx = val_by_section[s]
            if not v_idx:
                continue
            scores = score_samples(model, val_features[v_idx], cfg.include_component_weight)
            labels = [1 if val_items[i][1].label == "anomaly" else 0 for i in v_idx]
            if len(set(labels)) < 2:
                continue
            section_aucs.append(auc(scores, labels))
        if not section_aucs:
            raise ValueError("no section had a two-class validation set")
        mean_auc = float(np.mean(section_aucs))
        table.append((r, mean_auc))
        if mean_auc >= best_auc:
            best_r, best_auc = r, mean_auc
    return GridSearchResult(best_r=best_r, table=table)


def _with_r(cfg: MachineConfig, r):
    return replace(cfg, r=float(r))


def fit_machine(dataset_root, machine, cfg: MachineConfig, seed, out_dir) -> Path:
    """Train one model per section and write a bundle directory."""
    entries, _ = scan_split(dataset_root, machine, "train")
    sections = sorted({meta.section for _, meta in entries})
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": _BUNDLE_FORMAT,
        "version": _BUNDLE_VERSION,
        "tool_version": __version__,
        "machine": machine,
        "seed": int(seed),
        "config": machine_config_as_dict(cfg),
        "sections": {},
    }
    for section in sections:
        section_entries = [(p, m) for p, m in entries if m.section == section]
        items = [(load_wav(p), m) for p, m in section_entries]
        metas = [m for _, m in items]
        section_seed = derive_seed(seed, machine, "section", section)
        model, counts = _fit_from_features(
            clip_features(items, cfg), metas, cfg, section_seed
        )
        filename = f"section_{section:02d}.gmm"
        save_gmm(
            model,
            out_dir / filename,
            extra_meta={
                "machine": machine,
                "section": section,
                "seed": section_seed,
                "config": machine_config_as_dict(cfg),
            },
        )
        manifest["sections"][f"{section:02d}"] = {
            "file": filename,
            "feature_dim": model.dim,
            **counts,
        }
        log.info("trained %s section %02d on %d vectors", machine, section, counts["n_train"])
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out_dir


def load_bundle(bundle_dir):
    """Read a bundle directory back into (manifest, {section: model})."""
    bundle_dir = Path(bundle_dir)
    manifest_path = bundle_dir / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no manifest.json in {bundle_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != _BUNDLE_FORMAT:
        raise ValueError(f"{manifest_path} is not a model bundle manifest")
    models = {
        int(section): load_gmm(bundle_dir / info["file"])
        for section, info in manifest["sections"].items()
    }
    return manifest, models


def score_machine(bundle_dir, dataset_root, machine, cfg: MachineConfig, split="test"):
    """Score every clip of one split against its section's model."""
    _, models = load_bundle(bundle_dir)
    entries, _ = scan_split(dataset_root, machine, split)
    rows = []
    for section in sorted({meta.section for _, meta in entries}):
        if section not in models:
            raise ValueError(f"bundle has no model for section {section:02d}")
        items = [(load_wav(p), m) for p, m in entries if m.section == section]
        rows.extend(score_clips(models[section], items, cfg))
    rows.sort(key=lambda pair: (pair[0].section, pair[0].domain, pair[0].clip_id))
    return rows


def write_scores_csv(rows, path):
    """Score rows as CSV; floats use repr so files are bit-reproducible."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_CSV_HEADER)
        for meta, score in rows:
            writer.writerow(
                [meta.machine_type, f"{meta.section:02d}", meta.domain, meta.split,
                 meta.label, meta.clip_id, repr(float(score))]
            )


def read_scores_csv(path):
    """Inverse of :func:`write_scores_csv`."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_CSV_HEADER:
            raise ValueError(
                f"{path} is not a score CSV (header {header!r})"
            )
        for record in reader:
            machine, section, domain, split, label, clip_id, score = record
            meta = ClipMetadata(
                machine_type=machine, section=int(section), domain=domain,
                split=split, label=label, clip_id=clip_id,
            )
            rows.append((meta, float(score)))
    return rows


def evaluate_scores(rows, p):
    """Group score rows by (machine, section, domain) and build a report."""
    groups = {}
    for meta, score in rows:
        if meta.label not in ("normal", "anomaly"):
            raise ValueError(
                f"clip {meta.clip_id} of {meta.machine_type} section "
                f"{meta.section:02d} has label {meta.label!r}; evaluation "
                "needs normal/anomaly labels"
            )
        key = (meta.machine_type, meta.section, meta.domain)
        groups.setdefault(key, ([], []))
        groups[key][0].append(score)
        groups[key][1].append(1 if meta.label == "anomaly" else 0)
    return aggregate(groups, p=p)


def export_distances(model: GmmModel, features, metas, out_path):
    """Write the pairwise-distance matrix and its row-metadata sidecar.

    The model's component means are appended after the sample rows and
    flagged ``cluster_center`` in the sidecar, giving an external
    embedding tool cluster anchors alongside the data.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != len(metas):
        raise ValueError("features must be (n, dim) with one metadata row each")
    stacked = np.vstack([features, model.means])
    matrix = distance_matrix(model, stacked)

    out_path = Path(out_path)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])

    sidecar = out_path.with_suffix(out_path.suffix + ".meta.csv")
    with open(sidecar, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["row", "kind", "machine", "section", "domain", "split", "label", "clip_id"]
        )
        for i, meta in enumerate(metas):
            writer.writerow(
                [i, "sample", meta.machine_type, f"{meta.section:02d}", meta.domain,
                 meta.split, meta.label, meta.clip_id]
            )
        for k in range(model.k):
            writer.writerow([len(metas) + k, "cluster_center", "", "", "", "", "", str(k)])
    return out_path, sidecar

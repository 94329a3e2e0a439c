"""Command line front end.

Subcommands:
  fit          train per-section mixture models into a bundle directory
  score        score a dataset split against a trained bundle
  eval         turn labeled score CSVs into AUC/pAUC report files
  search-r     grid-search the pooling exponent on a labeled split
  export-dist  write pairwise distance matrices for external embedding

Typical session::

    twfr-gmm fit --dataset-root data --machine Valve --out models/valve
    twfr-gmm score --bundle models/valve --dataset-root data --out scores.csv
    twfr-gmm eval --scores scores.csv --out report

The kernel backend is chosen by the TWFR_GMM_BACKEND environment
variable (auto, numba, numpy); see the README.
"""

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    PipelineConfig,
    load_config,
    machine_config,
    machine_config_from_dict,
)
from .dataset import DatasetError, FilenameError, load_split, scan_split
from .dsp import AudioReadError, load_wav
from .metrics import write_report_csv, write_report_json
from .pipeline import (
    clip_features,
    evaluate_scores,
    export_distances,
    fit_machine,
    grid_search_r,
    load_bundle,
    read_scores_csv,
    score_machine,
    write_scores_csv,
)


def _parse_grid(text):
    """Grid spec: comma list ("0.2,0.5,1") or start:stop:step ("0:1:0.05")."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        values = []
        i = 0
        while True:
            v = round(start + i * step, 12)
            if v > stop + 1e-9:
                break
            values.append(min(v, stop))
            i += 1
    else:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    if not values:
        raise ValueError(f"empty grid: {text!r}")
    return values


def _pipeline_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return PipelineConfig()


def _train_config(args):
    """Resolve (machine config, seed) for commands that train models."""
    pipeline_cfg = _pipeline_config(args)
    cfg = machine_config(pipeline_cfg, args.machine, r_override=getattr(args, "r", None))
    seed = args.seed if args.seed is not None else pipeline_cfg.seed
    return pipeline_cfg, cfg, seed


def _bundle_config(args, manifest):
    """Scoring config: the bundle's own echo unless overridden on the CLI."""
    machine = args.machine or manifest["machine"]
    if getattr(args, "config", None):
        cfg = machine_config(load_config(args.config), machine, r_override=args.r)
    else:
        cfg = machine_config_from_dict(manifest["config"])
        if args.r is not None:
            cfg = replace(cfg, r=float(args.r))
            cfg.validate()
    return machine, cfg


def _cmd_fit(args) -> int:
    _, cfg, seed = _train_config(args)
    out = fit_machine(args.dataset_root, args.machine, cfg, seed, args.out)
    manifest, _ = load_bundle(out)
    sections = ", ".join(sorted(manifest["sections"]))
    print(f"trained {args.machine} (r={cfg.r}, k={cfg.k}) sections {sections} -> {out}")
    return 0


def _cmd_score(args) -> int:
    manifest, _ = load_bundle(args.bundle)
    machine, cfg = _bundle_config(args, manifest)
    rows = score_machine(args.bundle, args.dataset_root, machine, cfg, split=args.split)
    write_scores_csv(rows, args.out)
    print(f"scored {len(rows)} {machine} {args.split} clips -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    rows = []
    for path in args.scores:
        rows.extend(read_scores_csv(path))
    p = args.p if args.p is not None else _pipeline_config(args).pauc_fpr
    report = evaluate_scores(rows, p=p)
    out = Path(args.out)
    csv_path = out.with_suffix(".csv") if out.suffix != ".csv" else out
    json_path = csv_path.with_suffix(".json")
    write_report_csv(report, csv_path)
    write_report_json(report, json_path)
    print(f"rows: {len(report.rows)}  (pAUC FPR cap p={report.pauc_fpr})")
    print(f"mean AUC  over rows: {100.0 * report.mean_auc:.2f}%"
          f"  over machine types: {100.0 * report.mean_auc_over_machines:.2f}%")
    print(f"mean pAUC over rows: {100.0 * report.mean_pauc:.2f}%"
          f"  over machine types: {100.0 * report.mean_pauc_over_machines:.2f}%")
    print(f"report -> {csv_path} and {json_path}")
    return 0


def _cmd_search_r(args) -> int:
    _, cfg, seed = _train_config(args)
    grid = _parse_grid(args.grid)
    train = load_split(args.dataset_root, args.machine, "train")
    val = load_split(args.dataset_root, args.machine, args.val_split)
    result = grid_search_r(train.items, val.items, grid, cfg, seed)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "mean_auc", "selected"])
        for r, mean_auc in result.table:
            writer.writerow([repr(r), repr(mean_auc), int(r == result.best_r)])
    best_auc = dict(result.table)[result.best_r]
    print(f"best r for {args.machine}: {result.best_r} (mean AUC {100.0 * best_auc:.2f}%)")
    print(f"table -> {args.out}")
    return 0


def _cmd_export_dist(args) -> int:
    manifest, models = load_bundle(args.bundle)
    machine, cfg = _bundle_config(args, manifest)
    entries, _ = scan_split(args.dataset_root, machine, args.split)
    sections = sorted({meta.section for _, meta in entries})
    if args.section is not None:
        if args.section not in sections:
            raise DatasetError(f"split has no clips for section {args.section:02d}")
        sections = [args.section]
    out = Path(args.out)
    for section in sections:
        if section not in models:
            raise ValueError(f"bundle has no model for section {section:02d}")
        items = [(load_wav(p), m) for p, m in entries if m.section == section]
        metas = [m for _, m in items]
        features = clip_features(items, cfg)
        if args.section is not None:
            target = out
        else:
            target = out.with_name(f"{out.stem}_section{section:02d}{out.suffix}")
        matrix_path, sidecar = export_distances(models[section], features, metas, target)
        print(f"section {section:02d}: {len(metas)} clips + {models[section].k} "
              f"centers -> {matrix_path} (+ {sidecar.name})")
    return 0


def _add_common(parser, *, dataset=True, config=True, seed=False, r=False):
    if dataset:
        parser.add_argument("--dataset-root", required=True,
                            help="dataset directory laid out as <root>/<machine>/<split>/*.wav")
    if config:
        parser.add_argument("--config", default=None, help="YAML config file")
    if seed:
        parser.add_argument("--seed", type=int, default=None,
                            help="random seed (default: config seed, else 0)")
    if r:
        parser.add_argument("--r", type=float, default=None,
                            help="override the pooling exponent r in [0, 1]")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twfr-gmm",
        description="Anomalous sound detection with time-weighted frequency "
                    "representations and Gaussian mixture scoring.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="train per-section models into a bundle directory")
    _add_common(p, seed=True, r=True)
    p.add_argument("--machine", required=True, help="machine type, e.g. Fan")
    p.add_argument("--out", required=True, help="bundle directory to create")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("score", help="score a split against a trained bundle")
    _add_common(p, r=True)
    p.add_argument("--bundle", required=True, help="bundle directory from fit")
    p.add_argument("--machine", default=None, help="machine type (default: from bundle)")
    p.add_argument("--split", default="test", help="dataset split to score (default: test)")
    p.add_argument("--out", required=True, help="score CSV to write")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("eval", help="compute AUC/pAUC report from labeled score CSVs")
    _add_common(p, dataset=False)
    p.add_argument("--scores", action="append", required=True,
                   help="score CSV from the score subcommand (repeatable)")
    p.add_argument("--p", type=float, default=None,
                   help="pAUC false-positive-rate cap (default: config pauc_fpr, else 0.1)")
    p.add_argument("--out", required=True, help="report path; .csv and .json are written")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("search-r", help="grid-search r on a labeled validation split")
    _add_common(p, seed=True)
    p.add_argument("--machine", required=True, help="machine type, e.g. Fan")
    p.add_argument("--grid", default="0:1:0.01",
                   help="comma list or start:stop:step (default: 0:1:0.01)")
    p.add_argument("--val-split", default="test",
                   help="labeled split used for validation (default: test)")
    p.add_argument("--out", required=True, help="CSV table of r vs mean AUC")
    p.set_defaults(func=_cmd_search_r)

    p = sub.add_parser("export-dist", help="export pairwise distance matrices")
    _add_common(p, r=True)
    p.add_argument("--bundle", required=True, help="bundle directory from fit")
    p.add_argument("--machine", default=None, help="machine type (default: from bundle)")
    p.add_argument("--split", default="test", help="split to embed (default: test)")
    p.add_argument("--section", type=int, default=None,
                   help="restrict to one section (default: one file per section)")
    p.add_argument("--out", required=True, help="distance matrix CSV path")
    p.set_defaults(func=_cmd_export_dist)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, DatasetError, FilenameError, AudioReadError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

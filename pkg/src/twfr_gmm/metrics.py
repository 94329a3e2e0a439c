"""Detection metrics: AUC, partial AUC, and grouped report building.

AUC follows the Mann-Whitney convention (tied positive/negative pairs
earn half credit) and is computed from exact pair counts, so it matches
a brute-force double loop bit for bit.  Partial AUC integrates the ROC
staircase up to a false-positive-rate budget ``p`` and renormalizes by
``p``, with all areas accumulated in integer count units before the
single final division; at ``p = 1`` it reduces exactly to AUC.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_PAUC_FPR = 0.1


def _score_label_arrays(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D and the same length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    y = y.astype(np.int64)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 (normal) or 1 (anomalous)")
    if y.min() == y.max():
        raise ValueError("need at least one normal and one anomalous label")
    return s, y


def auc(scores, labels) -> float:
    """Probability a random anomalous score exceeds a random normal one."""
    s, y = _score_label_arrays(scores, labels)
    order = np.argsort(s, kind="stable")
    s, y = s[order], y[order]
    n_pos = int(y.sum())
    n_neg = y.size - n_pos

    num = 0.0
    neg_below = 0
    start = 0
    while start < y.size:
        stop = start
        while stop < y.size and s[stop] == s[start]:
            stop += 1
        pos_here = int(y[start:stop].sum())
        neg_here = (stop - start) - pos_here
        num += pos_here * neg_below + 0.5 * pos_here * neg_here
        neg_below += neg_here
        start = stop
    return num / (n_pos * n_neg)


def _roc_counts(s, y):
    """Cumulative (fp, tp) counts at each distinct descending threshold."""
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tps = np.cumsum(y)
    fps = np.arange(1, y.size + 1) - tps
    last_of_run = np.r_[s[1:] != s[:-1], True]
    tps, fps = tps[last_of_run], fps[last_of_run]
    return np.r_[0, fps], np.r_[0, tps]


def pauc(scores, labels, p=DEFAULT_PAUC_FPR) -> float:
    """Normalized area under the ROC curve restricted to FPR <= p."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    s, y = _score_label_arrays(scores, labels)
    fps, tps = _roc_counts(s, y)
    n_pos = int(tps[-1])
    n_neg = int(fps[-1])

    fp_cut = p * n_neg
    stop = int(np.searchsorted(fps, fp_cut, side="right"))
    fps_v = fps[:stop].astype(np.float64)
    tps_v = tps[:stop].astype(np.float64)
    if stop < fps.size and fps[stop] > fps[stop - 1]:
        # trapezoidal interpolation at the FPR budget
        frac = (fp_cut - fps[stop - 1]) / (fps[stop] - fps[stop - 1])
        fps_v = np.r_[fps_v, fp_cut]
        tps_v = np.r_[tps_v, tps[stop - 1] + frac * (tps[stop] - tps[stop - 1])]
    area = float(np.sum(np.diff(fps_v) * (tps_v[1:] + tps_v[:-1]) * 0.5))
    return area / (n_pos * n_neg) / p


@dataclass
class EvalRow:
    machine: str
    section: int
    domain: str
    auc: float
    pauc: float
    n_normal: int
    n_anomaly: int


@dataclass
class EvalReport:
    """Per-(machine, section, domain) metrics plus the two averagings."""

    rows: list[EvalRow] = field(default_factory=list)
    pauc_fpr: float = DEFAULT_PAUC_FPR

    @property
    def mean_auc(self) -> float:
        return float(np.mean([r.auc for r in self.rows]))

    @property
    def mean_pauc(self) -> float:
        return float(np.mean([r.pauc for r in self.rows]))

    def machine_means(self) -> dict:
        """Per-machine arithmetic means over that machine's rows."""
        by_machine = {}
        for row in self.rows:
            by_machine.setdefault(row.machine, []).append(row)
        return {
            m: {
                "auc": float(np.mean([r.auc for r in rows])),
                "pauc": float(np.mean([r.pauc for r in rows])),
            }
            for m, rows in by_machine.items()
        }

    @property
    def mean_auc_over_machines(self) -> float:
        return float(np.mean([v["auc"] for v in self.machine_means().values()]))

    @property
    def mean_pauc_over_machines(self) -> float:
        return float(np.mean([v["pauc"] for v in self.machine_means().values()]))


def aggregate(groups, p=DEFAULT_PAUC_FPR) -> EvalReport:
    """Score one ROC per group.

    ``groups`` maps ``(machine, section, domain)`` to ``(scores,
    labels)`` with labels 1 for anomalous.  Rows come out sorted by key.
    """
    report = EvalReport(pauc_fpr=p)
    for (machine, section, domain) in sorted(groups):
        scores, labels = groups[(machine, section, domain)]
        s, y = _score_label_arrays(scores, labels)
        report.rows.append(
            EvalRow(
                machine=machine,
                section=int(section),
                domain=domain,
                auc=auc(s, y),
                pauc=pauc(s, y, p),
                n_normal=int((y == 0).sum()),
                n_anomaly=int((y == 1).sum()),
            )
        )
    return report


def write_report_csv(report: EvalReport, path):
    """Rows plus a trailing averages block."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["machine", "section", "domain", "auc", "pauc", "n_normal", "n_anomaly"]
        )
        for r in report.rows:
            writer.writerow(
                [r.machine, f"{r.section:02d}", r.domain, repr(r.auc), repr(r.pauc),
                 r.n_normal, r.n_anomaly]
            )
        writer.writerow(
            ["average_over_rows", "", "", repr(report.mean_auc),
             repr(report.mean_pauc), "", ""]
        )
        writer.writerow(
            ["average_over_machines", "", "", repr(report.mean_auc_over_machines),
             repr(report.mean_pauc_over_machines), "", ""]
        )


def write_report_json(report: EvalReport, path):
    payload = {
        "pauc_fpr": report.pauc_fpr,
        "rows": [
            {
                "machine": r.machine,
                "section": r.section,
                "domain": r.domain,
                "auc": r.auc,
                "pauc": r.pauc,
                "n_normal": r.n_normal,
                "n_anomaly": r.n_anomaly,
            }
            for r in report.rows
        ],
        "averages": {
            "over_rows": {"auc": report.mean_auc, "pauc": report.mean_pauc},
            "over_machine_types": {
                "auc": report.mean_auc_over_machines,
                "pauc": report.mean_pauc_over_machines,
            },
            "per_machine": report.machine_means(),
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

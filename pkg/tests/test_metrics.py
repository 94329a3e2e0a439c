"""AUC/pAUC against brute-force oracles, plus report aggregation."""

import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twfr_gmm import aggregate, auc, pauc, write_report_csv, write_report_json


def brute_force_auc(scores, labels):
    """Pair counting: fraction of (pos, neg) pairs correctly ordered."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_inverted(self):
        assert auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_three_quarters(self):
        assert auc([1, 2, 3, 4], [0, 1, 0, 1]) == 0.75

    def test_all_tied_is_half(self):
        assert auc([5, 5, 5, 5], [0, 1, 0, 1]) == 0.5

    def test_matches_brute_force_exactly(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 200))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            # quantized scores force plenty of ties
            scores = np.round(rng.normal(size=n), 1)
            assert auc(scores, labels) == brute_force_auc(scores, labels)

    def test_rank_invariance(self):
        rng = np.random.default_rng(1)
        scores = rng.normal(size=50)
        labels = rng.integers(0, 2, 50)
        labels[0], labels[1] = 0, 1
        base = auc(scores, labels)
        for transform in (lambda s: 3 * s + 7, np.exp, lambda s: s ** 3):
            assert abs(auc(transform(scores), labels) - base) <= 1e-12

    def test_complement_symmetry(self):
        rng = np.random.default_rng(2)
        scores = rng.normal(size=40)
        labels = rng.integers(0, 2, 40)
        labels[0], labels[1] = 0, 1
        assert abs(auc(-scores, labels) - (1.0 - auc(scores, labels))) <= 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            auc([1.0, 2.0], [1, 1])

    def test_nonbinary_labels_rejected(self):
        with pytest.raises(ValueError):
            auc([1.0, 2.0], [0, 2])


class TestPauc:
    def test_perfect_any_p(self):
        for p in (0.05, 0.1, 0.5, 1.0):
            assert pauc([1, 2, 8, 9], [0, 0, 1, 1], p=p) == 1.0

    def test_hand_swept_example(self):
        """[4,3,2,1] / [1,0,1,0] at p=0.5: area 0.25 normalized by 0.5."""
        assert pauc([4, 3, 2, 1], [1, 0, 1, 0], p=0.5) == 0.5

    def test_p_one_equals_auc_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 120))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            scores = np.round(rng.normal(size=n), 1)
            assert pauc(scores, labels, p=1.0) == auc(scores, labels)

    def test_rank_invariance(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=60)
        labels = rng.integers(0, 2, 60)
        labels[0], labels[1] = 0, 1
        base = pauc(scores, labels, p=0.1)
        assert abs(pauc(2 * scores + 1, labels, p=0.1) - base) <= 1e-12

    def test_bad_p_rejected(self):
        for p in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                pauc([1, 2], [0, 1], p=p)

    def test_value_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            scores = rng.normal(size=30)
            labels = rng.integers(0, 2, 30)
            labels[0], labels[1] = 0, 1
            v = pauc(scores, labels, p=0.1)
            assert 0.0 <= v <= 1.0


class TestAggregate:
    def test_single_group_averages_equal_row(self):
        groups = {("M", 0, "source"): ([1.0, 2.0, 3.0, 4.0], [0, 1, 0, 1])}
        rep = aggregate(groups)
        assert len(rep.rows) == 1
        assert rep.mean_auc == rep.rows[0].auc
        assert rep.mean_pauc == rep.rows[0].pauc

    def test_two_group_average(self):
        groups = {
            ("M", 0, "source"): ([1, 2, 3, 4, 5], [0, 0, 1, 0, 1]),   # auc 0.833..
            ("M", 1, "source"): ([1, 2, 3, 4], [0, 1, 0, 1]),         # auc 0.75
        }
        rep = aggregate(groups)
        want = 0.5 * (rep.rows[0].auc + rep.rows[1].auc)
        assert abs(rep.mean_auc - want) <= 1e-12

    def test_seven_machine_average_scale(self):
        """Seven per-machine AUCs averaging to 78.59% stay 78.59 as percent."""
        aucs = [0.8065, 0.6781, 0.7144, 0.8023, 0.6941, 0.8796, 0.9261]
        rows = {}
        for i, a in enumerate(aucs):
            # build a score set whose AUC is exactly a = wins/(pos*neg)
            n_pos = n_neg = 100
            wins = int(round(a * n_pos * n_neg))
            full, part = divmod(wins, n_neg)
            pos = np.zeros(n_pos)
            pos[:full] = 2.0          # beat every negative
            if full < n_pos:
                pos[full] = 1.0       # beats exactly `part` negatives
            neg = np.full(n_neg, 1.5)
            neg[:part] = 0.5
            scores = np.concatenate([pos, neg])
            labels = np.concatenate([np.ones(n_pos, int), np.zeros(n_neg, int)])
            got = auc(scores, labels)
            assert got == wins / (n_pos * n_neg)
            rows[(f"machine_{i}", 0, "source")] = (scores, labels)
        rep = aggregate(rows)
        mean_machine_auc = rep.mean_auc_over_machines
        assert abs(100 * mean_machine_auc - 78.59) < 0.05

    def test_machine_vs_row_averaging_differ(self):
        groups = {
            ("A", 0, "source"): ([1, 2, 3, 4], [0, 1, 0, 1]),  # 0.75
            ("A", 1, "source"): ([1, 2, 3, 4], [0, 1, 0, 1]),  # 0.75
            ("B", 0, "source"): ([1, 2, 8, 9], [0, 0, 1, 1]),  # 1.0
        }
        rep = aggregate(groups)
        assert abs(rep.mean_auc - (0.75 + 0.75 + 1.0) / 3) <= 1e-12
        assert abs(rep.mean_auc_over_machines - (0.75 + 1.0) / 2) <= 1e-12

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            aggregate({("M", 0, "source"): ([], [])})


class TestReportFiles:
    def _report(self):
        groups = {
            ("A", 0, "source"): ([1, 2, 3, 4], [0, 1, 0, 1]),
            ("B", 2, "target"): ([1, 2, 8, 9], [0, 0, 1, 1]),
        }
        return aggregate(groups, p=0.25)

    def test_csv_layout(self, tmp_path):
        rep = self._report()
        path = tmp_path / "report.csv"
        write_report_csv(rep, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["machine", "section", "domain", "auc", "pauc",
                           "n_normal", "n_anomaly"]
        assert rows[1][:3] == ["A", "00", "source"]
        assert float(rows[1][3]) == rep.rows[0].auc
        assert rows[2][:3] == ["B", "02", "target"]
        labels = [r[0] for r in rows[3:]]
        assert labels == ["average_over_rows", "average_over_machines"]
        assert float(rows[3][3]) == rep.mean_auc

    def test_json_mirror(self, tmp_path):
        rep = self._report()
        path = tmp_path / "report.json"
        write_report_json(rep, path)
        with open(path) as fh:
            doc = json.load(fh)
        assert doc["pauc_fpr"] == 0.25
        assert len(doc["rows"]) == 2
        assert doc["rows"][0]["machine"] == "A"
        assert doc["averages"]["over_rows"]["auc"] == rep.mean_auc
        assert doc["averages"]["over_machine_types"]["auc"] == rep.mean_auc_over_machines
        assert set(doc["averages"]["per_machine"]) == {"A", "B"}

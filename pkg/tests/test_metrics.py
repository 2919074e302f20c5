import numpy as np
import pytest

from dirac import (
    InvalidArgumentError,
    UndefinedCorrelationError,
    classify_scores,
    stratified_folds,
    subject_counts,
)
from dirac.metrics import count_group, f1_score, partial_roc_auc, pr_auc, roc_auc


def brute_force_best_f1(labels, scores):
    """Exhaustive threshold search (oracle)."""
    best_f1, best_t = -1.0, None
    for t in sorted(set(scores)):
        pred = [s >= t for s in scores]
        tp = sum(p and y for p, y in zip(pred, labels))
        fp = sum(p and not y for p, y in zip(pred, labels))
        fn = sum((not p) and y for p, y in zip(pred, labels))
        prec = tp / (tp + fp) if tp + fp else 0.0
        sens = tp / (tp + fn) if tp + fn else 0.0
        f1 = f1_score(prec, sens)
        if f1 > best_f1:
            best_f1, best_t = f1, t
    return best_f1, best_t


class TestF1:
    def test_reported_column_consistency(self):
        # precision 0.792 with sensitivity 0.712 gives F1 = 0.750
        assert f1_score(0.792, 0.712) == pytest.approx(0.750, abs=1e-3)

    def test_zero_denominator(self):
        assert f1_score(0.0, 0.0) == 0.0


class TestClassifyScores:
    def test_perfect_separation(self):
        labels = [False] * 5 + [True] * 5
        scores = [0.1, 0.2, 0.15, 0.05, 0.3, 0.9, 0.8, 0.95, 0.85, 0.7]
        report = classify_scores(labels, scores)
        assert report.accuracy == 1.0
        assert report.f1 == 1.0
        assert report.roc_auc == 1.0
        assert report.proc_auc == 1.0
        assert report.pr_auc == 1.0

    def test_matches_exhaustive_threshold_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            labels = [bool(b) for b in rng.integers(0, 2, 10)]
            if all(labels) or not any(labels):
                continue
            scores = list(rng.random(10).round(2))
            report = classify_scores(labels, scores)
            best_f1, best_t = brute_force_best_f1(labels, scores)
            assert report.f1 == pytest.approx(best_f1, abs=1e-12)
            assert report.threshold == pytest.approx(best_t)

    def test_tie_breaks_to_lowest_threshold(self):
        labels = [True, True, False, False]
        scores = [0.9, 0.8, 0.2, 0.1]
        # Any threshold in (0.2, 0.8] yields F1=1; expect the lowest candidate
        report = classify_scores(labels, scores)
        assert report.threshold == 0.8

    def test_f1_identity_on_reports(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            labels = [bool(b) for b in rng.integers(0, 2, 30)]
            if all(labels) or not any(labels):
                continue
            report = classify_scores(labels, list(rng.random(30)))
            if report.precision + report.sensitivity > 0:
                assert report.f1 == pytest.approx(
                    f1_score(report.precision, report.sensitivity), abs=1e-12
                )

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(2)
        labels = [bool(b) for b in rng.integers(0, 2, 40)]
        labels[0], labels[1] = True, False
        scores = rng.random(40)
        base = classify_scores(labels, scores)
        warped = classify_scores(labels, np.exp(3.0 * scores))
        for attr in ("accuracy", "f1", "sensitivity", "specificity", "precision",
                     "roc_auc", "proc_auc", "pr_auc"):
            assert getattr(base, attr) == pytest.approx(getattr(warped, attr), abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(InvalidArgumentError):
            classify_scores([True, True], [0.5, 0.6])

    def test_roc_auc_matches_sklearn(self):
        from sklearn.metrics import average_precision_score, roc_auc_score

        rng = np.random.default_rng(3)
        for _ in range(10):
            labels = rng.integers(0, 2, 50).astype(bool)
            labels[:2] = [True, False]
            scores = rng.random(50).round(2)  # force ties
            assert roc_auc(labels, scores) == pytest.approx(
                roc_auc_score(labels, scores), abs=1e-12
            )
            assert pr_auc(labels, scores) == pytest.approx(
                average_precision_score(labels, scores), abs=1e-12
            )

    def test_partial_roc_bounds(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            labels = rng.integers(0, 2, 30).astype(bool)
            labels[:2] = [True, False]
            scores = rng.random(30)
            p = partial_roc_auc(labels, scores)
            assert 0.0 <= p <= 1.0

    def test_partial_roc_numeric_integration_oracle(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 2, 25).astype(bool)
        labels[:2] = [True, False]
        scores = rng.random(25).round(1)
        # Dense numeric integration of the TPR staircase over (0, 0.1)
        grid = np.linspace(0.0, 0.1, 20001)
        thresholds = np.unique(scores)[::-1]
        pts = [(0.0, 0.0)]
        neg = (~labels).sum()
        pos = labels.sum()
        for t in thresholds:
            pred = scores >= t
            pts.append(
                (np.sum(pred & ~labels) / neg, np.sum(pred & labels) / pos)
            )
        def tpr_at(f):
            best = 0.0
            for fp, tp in pts:
                if fp <= f:
                    best = max(best, tp)
            return best
        numeric = np.trapezoid([tpr_at(f) for f in grid], grid) / 0.1
        assert partial_roc_auc(labels, scores) == pytest.approx(numeric, abs=1e-3)


class TestSubjectCounts:
    def test_identical(self):
        rho, mse = subject_counts([0, 1, 2, 3], [0, 1, 2, 3])
        assert rho == pytest.approx(1.0)
        assert mse == 0.0

    def test_mse_arithmetic(self):
        _, mse = subject_counts([0, 1, 2, 3], [0, 1, 2, 4])
        assert mse == 0.25

    def test_two_pass_pearson_oracle(self):
        rng = np.random.default_rng(6)
        t = rng.integers(0, 10, 20).astype(float)
        p = t + rng.normal(0, 1, 20)
        rho, _ = subject_counts(t, p)
        mt, mp = t.mean(), p.mean()
        num = np.sum((t - mt) * (p - mp))
        den = np.sqrt(np.sum((t - mt) ** 2) * np.sum((p - mp) ** 2))
        assert rho == pytest.approx(num / den, abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(UndefinedCorrelationError):
            subject_counts([2, 2, 2], [1, 2, 3])


class TestStratifiedFolds:
    def test_group_boundaries(self):
        assert [count_group(c) for c in (0, 0, 2, 5, 9)] == [0, 0, 1, 2, 3]

    def test_exact_division(self):
        subjects = []
        sid = 0
        for count in (0, 2, 5, 9):
            for _ in range(5):
                subjects.append((sid, count))
                sid += 1
        fa = stratified_folds(subjects, k=5, seed=1)
        for fold in range(5):
            per_group = [0, 0, 0, 0]
            for s, _ in subjects:
                if fa.fold_of(s) == fold:
                    per_group[fa.groups[s]] += 1
            assert per_group == [1, 1, 1, 1]

    def test_balance_up_to_remainder(self):
        rng = np.random.default_rng(7)
        subjects = [(i, int(rng.integers(0, 12))) for i in range(33)]
        fa = stratified_folds(subjects, k=5, seed=3)
        for g in range(4):
            sizes = [
                sum(1 for s, _ in subjects if fa.groups[s] == g and fa.fold_of(s) == f)
                for f in range(5)
            ]
            assert max(sizes) - min(sizes) <= 1

    def test_deterministic(self):
        subjects = [(i, i % 8) for i in range(20)]
        a = stratified_folds(subjects, k=5, seed=9)
        b = stratified_folds(subjects, k=5, seed=9)
        assert a.folds == b.folds

    def test_every_subject_once(self):
        subjects = [(i, i % 5) for i in range(17)]
        fa = stratified_folds(subjects, k=4, seed=0)
        assert sorted(fa.folds) == [s for s, _ in subjects]

    def test_k_validation(self):
        with pytest.raises(InvalidArgumentError):
            stratified_folds([(0, 0), (1, 1)], k=1)

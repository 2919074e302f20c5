"""Classification metrics, stratified folds, and subject-level agreement.

Threshold selection maximizes F1 (ties broken toward the lowest threshold,
i.e. higher sensitivity).  ROC AUC uses trapezoidal integration; the partial
ROC AUC integrates the piecewise-constant TPR(FPR) staircase over
FPR in (0, 0.1) and normalizes by 0.1 so a perfect classifier scores 1.0.
PR AUC uses piecewise-constant interpolation (step integration over recall).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import InvalidArgumentError, UndefinedCorrelationError

PARTIAL_ROC_FPR_MAX = 0.1


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    f1: float
    sensitivity: float
    specificity: float
    precision: float
    roc_auc: float
    proc_auc: float
    pr_auc: float
    threshold: float
    pearson_rho: float | None = None
    mse: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def f1_score(precision: float, sensitivity: float) -> float:
    if precision + sensitivity == 0.0:
        return 0.0
    return 2.0 * precision * sensitivity / (precision + sensitivity)


def _roc_points(labels: np.ndarray, scores: np.ndarray):
    """ROC staircase points (fpr, tpr), starting at (0,0), ending at (1,1).

    Scores are swept from high to low; tied scores move together.
    """
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    pos = int(y.sum())
    neg = len(y) - pos
    tps = np.cumsum(y)
    fps = np.cumsum(1 - y)
    # Keep only the last index of each tied-score block.
    distinct = np.nonzero(np.diff(s, append=np.nan))[0]
    tpr = np.concatenate([[0.0], tps[distinct] / pos])
    fpr = np.concatenate([[0.0], fps[distinct] / neg])
    return fpr, tpr


def roc_auc(labels, scores) -> float:
    fpr, tpr = _roc_points(np.asarray(labels, dtype=float), np.asarray(scores, dtype=float))
    return float(np.trapezoid(tpr, fpr))


def partial_roc_auc(labels, scores, fpr_max: float = PARTIAL_ROC_FPR_MAX) -> float:
    """Step-function area of TPR over FPR in (0, fpr_max), divided by fpr_max."""
    fpr, tpr = _roc_points(np.asarray(labels, dtype=float), np.asarray(scores, dtype=float))
    area = 0.0
    for i in range(1, len(fpr)):
        lo = min(fpr[i - 1], fpr_max)
        hi = min(fpr[i], fpr_max)
        # TPR is constant at tpr[i-1] on [fpr[i-1], fpr[i]); vertical ROC
        # segments (lo == hi) contribute nothing.
        area += (hi - lo) * tpr[i - 1]
    # Beyond the last point TPR stays at 1.0 up to fpr_max.
    if fpr[-1] < fpr_max:
        area += (fpr_max - fpr[-1]) * tpr[-1]
    return float(area / fpr_max)


def pr_auc(labels, scores) -> float:
    """Average-precision-style step integration of the PR curve."""
    labels = np.asarray(labels, dtype=float)
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    pos = y.sum()
    tps = np.cumsum(y)
    fps = np.cumsum(1 - y)
    distinct = np.nonzero(np.diff(s, append=np.nan))[0]
    recall = tps[distinct] / pos
    precision = tps[distinct] / (tps[distinct] + fps[distinct])
    prev_recall = 0.0
    area = 0.0
    for r, p in zip(recall, precision):
        area += (r - prev_recall) * p
        prev_recall = r
    return float(area)


def _confusion(labels: np.ndarray, predictions: np.ndarray):
    tp = int(np.sum(predictions & labels))
    fp = int(np.sum(predictions & ~labels))
    fn = int(np.sum(~predictions & labels))
    tn = int(np.sum(~predictions & ~labels))
    return tp, fp, fn, tn


def classify_scores(labels, scores) -> MetricsReport:
    """Full lesion-level report: F1-maximizing threshold plus curve AUCs."""
    labels = np.asarray(labels, dtype=bool)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape or labels.ndim != 1 or len(labels) < 2:
        raise InvalidArgumentError("labels and scores must be equal-length 1D, length >= 2")
    if labels.all() or not labels.any():
        raise InvalidArgumentError("both classes must be present")

    best = None
    for t in np.unique(scores):
        pred = scores >= t
        tp, fp, fn, _ = _confusion(labels, pred)
        prec = tp / (tp + fp) if tp + fp else 0.0
        sens = tp / (tp + fn)
        f1 = f1_score(prec, sens)
        # Strict > keeps the lowest threshold on ties (unique() is ascending).
        if best is None or f1 > best[0]:
            best = (f1, float(t))
    f1, threshold = best

    pred = scores >= threshold
    tp, fp, fn, tn = _confusion(labels, pred)
    precision = tp / (tp + fp) if tp + fp else 0.0
    sensitivity = tp / (tp + fn)
    specificity = tn / (tn + fp) if tn + fp else 0.0
    accuracy = (tp + tn) / len(labels)
    return MetricsReport(
        accuracy=accuracy,
        f1=f1,
        sensitivity=sensitivity,
        specificity=specificity,
        precision=precision,
        roc_auc=roc_auc(labels, scores),
        proc_auc=partial_roc_auc(labels, scores),
        pr_auc=pr_auc(labels, scores),
        threshold=threshold,
    )


def subject_counts(true_counts, predicted_counts) -> tuple[float, float]:
    """Pearson correlation and MSE between per-subject lesion counts."""
    t = np.asarray(true_counts, dtype=float)
    p = np.asarray(predicted_counts, dtype=float)
    if t.shape != p.shape or t.ndim != 1 or len(t) < 2:
        raise InvalidArgumentError("need >= 2 subjects with matching counts")
    if np.var(t) == 0.0 or np.var(p) == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance counts")
    rho = float(np.corrcoef(t, p)[0, 1])
    mse = float(np.mean((t - p) ** 2))
    return rho, mse


COUNT_GROUP_EDGES = (0, 3, 6)  # none / 1-3 / 4-6 / more than 6


def count_group(rim_count: int) -> int:
    if rim_count == 0:
        return 0
    if rim_count <= 3:
        return 1
    if rim_count <= 6:
        return 2
    return 3


@dataclass(frozen=True)
class FoldAssignment:
    folds: dict  # subject id -> fold index
    groups: dict  # subject id -> count group

    def fold_of(self, subject_id) -> int:
        return self.folds[subject_id]


def stratified_folds(subjects, k: int = 5, seed: int = 0) -> FoldAssignment:
    """Bucket subjects by rim+ count group, shuffle each group by seed, and
    deal round-robin into k folds (per-fold group counts differ by <= 1)."""
    subjects = list(subjects)
    if k < 2:
        raise InvalidArgumentError("k must be >= 2")
    if len(subjects) < k:
        raise InvalidArgumentError(f"need at least k={k} subjects, got {len(subjects)}")
    buckets: dict[int, list] = {0: [], 1: [], 2: [], 3: []}
    groups = {}
    for sid, count in subjects:
        g = count_group(int(count))
        groups[sid] = g
        buckets[g].append(sid)
    rng = np.random.Generator(np.random.Philox(seed))
    folds = {}
    for g in sorted(buckets):
        ids = buckets[g]
        order = rng.permutation(len(ids))
        for pos, idx in enumerate(order):
            folds[ids[idx]] = pos % k
    return FoldAssignment(folds=folds, groups=groups)

"""Classification protocol: balanced undersampling, stratified k-fold CV,
the in-house logistic classifier, and a most-frequent-class baseline.

Standardization statistics always come from the training folds only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lexicon import FeatureTable
from .stats import logistic_fit


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int


@dataclass(frozen=True)
class FoldMetrics:
    accuracy: float
    f1_macro: float
    precision_macro: float
    recall_macro: float


@dataclass
class ClassifierReport:
    per_fold: list[FoldMetrics]
    accuracy: float
    f1_macro: float
    precision_macro: float
    recall_macro: float

    @classmethod
    def from_folds(cls, per_fold: Sequence[FoldMetrics]) -> "ClassifierReport":
        return cls(
            list(per_fold),
            accuracy=float(np.mean([m.accuracy for m in per_fold])),
            f1_macro=float(np.mean([m.f1_macro for m in per_fold])),
            precision_macro=float(np.mean([m.precision_macro for m in per_fold])),
            recall_macro=float(np.mean([m.recall_macro for m in per_fold])),
        )

    def to_dict(self) -> dict:
        return {
            "per_fold": [
                {
                    "accuracy": m.accuracy,
                    "f1_macro": m.f1_macro,
                    "precision_macro": m.precision_macro,
                    "recall_macro": m.recall_macro,
                }
                for m in self.per_fold
            ],
            "mean": {
                "accuracy": self.accuracy,
                "f1_macro": self.f1_macro,
                "precision_macro": self.precision_macro,
                "recall_macro": self.recall_macro,
            },
        }


def undersample(ids: Sequence[str], y: Sequence[int], seed: int) -> list[str]:
    """Keep the whole minority class plus a seeded uniform same-size sample of
    the majority class; original order preserved."""
    y_arr = np.asarray(list(y))
    if len(ids) != y_arr.size:
        raise ValueError("ids and y must align")
    idx0 = np.nonzero(y_arr == 0)[0]
    idx1 = np.nonzero(y_arr == 1)[0]
    if idx0.size == 0 or idx1.size == 0:
        raise ValueError("both classes must be present")
    minority, majority = (idx1, idx0) if idx1.size <= idx0.size else (idx0, idx1)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(majority.size, size=minority.size, replace=False)
    keep = set(minority.tolist()) | set(majority[chosen].tolist())
    return [sid for i, sid in enumerate(ids) if i in keep]


def stratified_folds(y: Sequence[int], k: int, seed: int) -> FoldPlan:
    """Shuffle within each class (seeded) and deal round-robin into k folds."""
    y_arr = np.asarray(list(y))
    if k < 2:
        raise ValueError("k must be at least 2")
    assignments = np.full(y_arr.size, -1, dtype=int)
    rng = np.random.default_rng(seed)
    for cls in np.unique(y_arr):
        idx = np.nonzero(y_arr == cls)[0]
        if idx.size < k:
            raise ValueError(f"class {cls} has {idx.size} samples, fewer than k={k}")
        perm = rng.permutation(idx.size)
        for pos, which in enumerate(perm):
            assignments[idx[which]] = pos % k
    return FoldPlan(k, assignments, seed)


def _metrics(y_true: np.ndarray, y_pred: np.ndarray) -> FoldMetrics:
    precisions = []
    recalls = []
    f1s = []
    for cls in (0, 1):
        tp = int(np.sum((y_pred == cls) & (y_true == cls)))
        fp = int(np.sum((y_pred == cls) & (y_true != cls)))
        fn = int(np.sum((y_pred != cls) & (y_true == cls)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    return FoldMetrics(
        accuracy=float(np.mean(y_true == y_pred)),
        f1_macro=float(np.mean(f1s)),
        precision_macro=float(np.mean(precisions)),
        recall_macro=float(np.mean(recalls)),
    )


def _fit_scaler(X_train: np.ndarray, feature_names: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    mu = X_train.mean(axis=0)
    sd = X_train.std(axis=0, ddof=1)
    flat = np.nonzero(sd == 0)[0]
    if flat.size:
        raise ValueError(f"zero variance in feature {feature_names[flat[0]]}")
    return mu, sd


def train_eval(features: FeatureTable, y: Sequence[int], plan: FoldPlan) -> ClassifierReport:
    """Per fold: scale with training statistics, fit the logistic classifier,
    predict the held-out fold at threshold 0.5."""
    X_full = features.matrix()
    y_arr = np.asarray(list(y))
    if y_arr.size != X_full.shape[0] or plan.assignments.size != X_full.shape[0]:
        raise ValueError("features, y, and fold plan must align")
    per_fold: list[FoldMetrics] = []
    for fold in range(plan.k):
        test_mask = plan.assignments == fold
        train_mask = ~test_mask
        y_train = y_arr[train_mask]
        if np.unique(y_train).size < 2:
            raise ValueError(f"training data for fold {fold} contains a single class")
        mu, sd = _fit_scaler(X_full[train_mask], features.feature_names)
        z_train = (X_full[train_mask] - mu) / sd
        z_test = (X_full[test_mask] - mu) / sd
        design_train = np.column_stack([np.ones(z_train.shape[0]), z_train])
        design_test = np.column_stack([np.ones(z_test.shape[0]), z_test])
        fit = logistic_fit(design_train, y_train)
        pred = (fit.predict_proba(design_test) >= 0.5).astype(int)
        per_fold.append(_metrics(y_arr[test_mask], pred))
    return ClassifierReport.from_folds(per_fold)


def mfc_baseline(y: Sequence[int]) -> ClassifierReport:
    """Predict the most frequent class everywhere (tie -> class 0)."""
    y_arr = np.asarray(list(y))
    n0 = int(np.sum(y_arr == 0))
    n1 = int(np.sum(y_arr == 1))
    majority = 0 if n0 >= n1 else 1
    pred = np.full(y_arr.size, majority, dtype=int)
    return ClassifierReport.from_folds([_metrics(y_arr, pred)])

"""Quality scores for synthetic tabular data, plus the balanced-accuracy AUC.

``ks_complement`` compares one column's marginal distribution between real
and synthetic data, ``cs_test`` compares pairwise correlation structure.  Both
lie in [0, 1] with 1 meaning indistinguishable.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import DataError, LabeledDataset


def auc_from_counts(tp: int, fn: int, tn: int, fp: int) -> float:
    """Mean of sensitivity and specificity.

    This is the "AUC" used throughout the package: balanced accuracy over hard
    predictions, not the area under a ROC curve.
    """
    if min(tp, fn, tn, fp) < 0:
        raise ValueError("confusion counts must be non-negative")
    if tp + fn == 0:
        raise ValueError("sensitivity undefined: no positive rows (tp + fn = 0)")
    if tn + fp == 0:
        raise ValueError("specificity undefined: no negative rows (tn + fp = 0)")
    return (tp / (tp + fn) + tn / (tn + fp)) / 2


def confusion_counts(y_true, y_pred) -> tuple[int, int, int, int]:
    """(tp, fn, tn, fp) with class 1 as the positive class."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred != 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fp = int(np.sum((y_true == 0) & (y_pred != 0)))
    return tp, fn, tn, fp


def ks_statistic(a, b) -> float:
    """Two-sample KS statistic, evaluated exactly on the pooled sample points."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs two non-empty columns")
    support = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, support, side="right") / a.size
    cdf_b = np.searchsorted(b, support, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_complement(real, synthetic) -> float:
    return 1.0 - ks_statistic(real, synthetic)


def pearson(a, b) -> float:
    """Sample Pearson correlation. Raises on a constant input."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vectors must have equal length, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise ValueError("correlation needs at least two observations")
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denom == 0:
        raise ValueError("correlation undefined for a constant vector")
    return float(np.clip(np.sum(da * db) / denom, -1.0, 1.0))


def correlation_similarity(s: float, r: float) -> float:
    return 1.0 - abs(s - r) / 2


def _matched_columns(real: LabeledDataset, synth: LabeledDataset):
    missing = [name for name in real.feature_names if name not in synth.feature_names]
    extra = [name for name in synth.feature_names if name not in real.feature_names]
    if missing or extra:
        offending = (missing or extra)[0]
        raise DataError(f"column {offending!r} is not present in both datasets")
    order = [synth.feature_names.index(name) for name in real.feature_names]
    return real.features, synth.features[:, order]


def per_column_ks(real: LabeledDataset, synth: LabeledDataset) -> dict[str, float]:
    R, S = _matched_columns(real, synth)
    return {name: ks_complement(R[:, j], S[:, j]) for j, name in enumerate(real.feature_names)}


def mean_ks_complement(real: LabeledDataset, synth: LabeledDataset) -> float:
    return float(np.mean(list(per_column_ks(real, synth).values())))


def _corr_or_none(a, b):
    try:
        return pearson(a, b)
    except ValueError:
        return None


def per_pair_cs(real: LabeledDataset, synth: LabeledDataset):
    """Correlation-similarity score for every unordered feature pair.

    Returns ``(scores, skipped)``.  A pair whose correlation is undefined in
    both datasets scores 1 (both treated as 0); a pair undefined in only one
    of them is skipped and listed.
    """
    if real.d < 2:
        raise DataError("correlation similarity needs at least two feature columns")
    R, S = _matched_columns(real, synth)
    scores, skipped = {}, []
    for i, j in itertools.combinations(range(real.d), 2):
        key = (real.feature_names[i], real.feature_names[j])
        r = _corr_or_none(R[:, i], R[:, j])
        s = _corr_or_none(S[:, i], S[:, j])
        if r is None and s is None:
            r = s = 0.0
        elif r is None or s is None:
            skipped.append(key)
            continue
        scores[key] = correlation_similarity(s, r)
    return scores, skipped


def cs_test(real: LabeledDataset, synth: LabeledDataset) -> float:
    scores, _ = per_pair_cs(real, synth)
    if not scores:
        raise DataError("no feature pair has a defined correlation in both datasets")
    return float(np.mean(list(scores.values())))


@dataclass
class QualityReport:
    column_ks: dict[str, float]
    pair_cs: dict[tuple[str, str], float]
    skipped_pairs: list[tuple[str, str]] = field(default_factory=list)

    @property
    def mean_ks(self) -> float:
        return float(np.mean(list(self.column_ks.values())))

    @property
    def mean_cs(self) -> float:
        return float(np.mean(list(self.pair_cs.values())))

    def to_dict(self) -> dict:
        return {
            "mean_ks_complement": self.mean_ks,
            "mean_cs_test": self.mean_cs,
            "ks_complement": self.column_ks,
            "cs_test": [{"a": a, "b": b, "score": v} for (a, b), v in self.pair_cs.items()],
            "skipped_pairs": [list(p) for p in self.skipped_pairs],
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def quality_report(real: LabeledDataset, synth: LabeledDataset) -> QualityReport:
    column_ks = per_column_ks(real, synth)
    pair_cs, skipped = per_pair_cs(real, synth)
    if not pair_cs:
        raise DataError("no feature pair has a defined correlation in both datasets")
    return QualityReport(column_ks, pair_cs, skipped)

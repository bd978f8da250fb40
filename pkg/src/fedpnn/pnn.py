"""Probabilistic neural network over cluster centers.

Each class density is a Parzen estimate with a Gaussian kernel around every
center of that class.  The kernel is fed the sqrt(d)-normalized distance used
by ECM rather than the raw Euclidean one; this only rescales the effective
bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .ecm import NUM_CLASSES, Cluster, cluster_label
from .synthmetrics import auc_from_counts, confusion_counts

DEFAULT_SIGMA = 0.1


class EmptyClassError(ValueError):
    """A PNN needs at least one center in every class to make a prediction."""


@dataclass(frozen=True)
class PnnModel:
    class_groups: tuple[np.ndarray, np.ndarray]
    sigma: float
    dim: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        groups = tuple(np.asarray(g, dtype=float).reshape(-1, self.dim) for g in self.class_groups)
        if len(groups) != NUM_CLASSES:
            raise ValueError(f"expected {NUM_CLASSES} class groups, got {len(groups)}")
        if all(g.shape[0] == 0 for g in groups):
            raise ValueError("PNN has no centers at all")
        for g in groups:
            g.flags.writeable = False
        object.__setattr__(self, "class_groups", groups)

    @property
    def group_sizes(self) -> tuple[int, int]:
        return tuple(g.shape[0] for g in self.class_groups)

    def _check_predictable(self):
        for c, g in enumerate(self.class_groups):
            if g.shape[0] == 0:
                raise EmptyClassError(f"class {c} has no centers; cannot score")

    def scores(self, X) -> np.ndarray:
        """Class densities for every row of ``X``, shape ``(n, 2)``."""
        self._check_predictable()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {X.shape[1]}")
        norm = (2 * math.pi) ** (self.dim / 2) * self.sigma ** self.dim
        out = np.empty((X.shape[0], NUM_CLASSES))
        for c, g in enumerate(self.class_groups):
            sq = _sq_normalized_distances(X, g)
            out[:, c] = np.exp(-sq / (2 * self.sigma ** 2)).sum(axis=1) / (g.shape[0] * norm)
        return out

    def predict(self, X) -> np.ndarray:
        s = self.scores(X)
        # argmax returns the first maximum, so exact ties go to class 0
        pred = np.argmax(s, axis=1)
        underflow = np.all(s == 0, axis=1)
        if np.any(underflow):
            X = np.atleast_2d(np.asarray(X, dtype=float))[underflow]
            nearest = np.stack([_sq_normalized_distances(X, g).min(axis=1)
                                for g in self.class_groups], axis=1)
            pred[underflow] = np.argmin(nearest, axis=1)
        return pred


def _sq_normalized_distances(X, centers):
    diff = X[:, None, :] - centers[None, :, :]
    return np.sum(diff * diff, axis=2) / X.shape[1]


def pnn_from_clusters(clusters: list[Cluster], sigma: float = DEFAULT_SIGMA) -> PnnModel:
    """Put each cluster center into the group of its majority class."""
    if not clusters:
        raise ValueError("cannot build a PNN from an empty cluster list")
    dim = clusters[0].center.shape[0]
    groups = [[], []]
    for c in clusters:
        groups[cluster_label(c)].append(c.center)
    return PnnModel(tuple(np.array(g, dtype=float).reshape(-1, dim) for g in groups), sigma, dim)


def pnn_score(model: PnnModel, x) -> np.ndarray:
    return model.scores(np.asarray(x, dtype=float)[None, :])[0]


def pnn_predict(model: PnnModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=float)[None, :])[0])


def evaluate(model: PnnModel, test: LabeledDataset) -> float:
    """Balanced accuracy of the model's hard predictions on ``test``."""
    pred = model.predict(test.features)
    return auc_from_counts(*confusion_counts(test.labels, pred))

"""Modified Evolving Clustering Method.

A one-pass clusterer: every point either falls inside an existing cluster,
stretches the cheapest cluster to cover it, or seeds a new cluster.  Unlike
plain ECM each cluster also counts how many points of each class it
absorbed, which later decides the cluster's label.

Distances are Euclidean divided by ``sqrt(d)``, so points in the unit
hypercube are at most 1 apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NUM_CLASSES = 2


@dataclass
class Cluster:
    center: np.ndarray
    radius: float
    freq: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Cluster):
            return NotImplemented
        return (np.array_equal(self.center, other.center) and self.radius == other.radius
                and np.array_equal(self.freq, other.freq))

    @property
    def size(self) -> int:
        return int(self.freq.sum())


def normalized_distance(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError(f"points must be non-empty vectors of equal length, got {x.shape} and {y.shape}")
    return float(np.sqrt(np.sum((x - y) ** 2)) / math.sqrt(x.size))


def cluster_label(c: Cluster) -> int:
    """Majority class of the cluster; a tie goes to class 0."""
    if c.freq.sum() < 1:
        raise ValueError("cluster has no members")
    return int(np.argmax(c.freq))


class EcmModel:
    """Growing set of clusters.

    Centers, radii and class counts live in preallocated arrays that double
    when full; :attr:`clusters` exposes copies as :class:`Cluster` records.
    A model must be fed from a single thread.
    """

    def __init__(self, dthr: float, multiplier: float = 2.0, dim: int | None = None):
        if not 0 <= dthr < 1:
            raise ValueError(f"dthr must lie in [0, 1), got {dthr}")
        if multiplier <= 0:
            raise ValueError(f"multiplier must be positive, got {multiplier}")
        self.dthr = float(dthr)
        self.multiplier = float(multiplier)
        self.dim = dim
        self.points_seen = 0
        self._n = 0
        self._centers = np.empty((0, 0))
        self._radii = np.empty(0)
        self._freq = np.empty((0, NUM_CLASSES), dtype=np.int64)

    def __len__(self):
        return self._n

    @property
    def centers(self) -> np.ndarray:
        return self._centers[: self._n].copy()

    @property
    def radii(self) -> np.ndarray:
        return self._radii[: self._n].copy()

    @property
    def freqs(self) -> np.ndarray:
        return self._freq[: self._n].copy()

    @property
    def clusters(self) -> list[Cluster]:
        return [Cluster(self._centers[i].copy(), float(self._radii[i]), self._freq[i].copy())
                for i in range(self._n)]

    def update(self, x, label: int) -> "EcmModel":
        """Present one labelled point."""
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label!r}")
        counts = np.zeros(NUM_CLASSES, dtype=np.int64)
        counts[label] = 1
        return self.absorb(x, counts)

    def absorb(self, x, counts) -> "EcmModel":
        """Present one point carrying a whole class-count vector.

        Clients call this with one-hot counts; the server calls it with the
        counts of an incoming client cluster, which are added wholesale.
        """
        x = np.asarray(x, dtype=float)
        counts = np.asarray(counts, dtype=np.int64)
        if self.dim is None:
            self.dim = x.size
        if x.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        if counts.shape != (NUM_CLASSES,) or np.any(counts < 0) or counts.sum() < 1:
            raise ValueError(f"class counts must be two non-negative integers with a positive total, got {counts}")
        self.points_seen += int(counts.sum())

        if self._n == 0:
            self._append(x, counts)
            return self

        n = self._n
        centers = self._centers[:n]
        radii = self._radii[:n]
        dist = np.sqrt(np.sum((centers - x) ** 2, axis=1)) / math.sqrt(self.dim)

        m = int(np.argmin(dist))
        if dist[m] <= radii[m]:
            self._freq[m] += counts
            return self

        s = dist + radii
        a = int(np.argmin(s))
        if s[a] > self.multiplier * self.dthr:
            self._append(x, counts)
            return self

        self._radii[a] = s[a] / 2
        gap = dist[a]
        if gap > 0:
            ratio = min(max(abs(gap - self._radii[a]) / gap, 0.0), 1.0)
            self._centers[a] = centers[a] + (x - centers[a]) * ratio
        self._freq[a] += counts
        return self

    def _append(self, x, counts):
        if self._n == self._centers.shape[0]:
            cap = max(8, 2 * self._n)
            grown = np.empty((cap, self.dim))
            if self._n:
                grown[: self._n] = self._centers[: self._n]
            self._centers = grown
            self._radii = np.resize(self._radii, cap)
            freq = np.zeros((cap, NUM_CLASSES), dtype=np.int64)
            freq[: self._n] = self._freq[: self._n]
            self._freq = freq
        self._centers[self._n] = x
        self._radii[self._n] = 0.0
        self._freq[self._n] = counts
        self._n += 1


def ecm_update(model: EcmModel, x, label: int) -> EcmModel:
    return model.update(x, label)


def ecm_fit(X, y, dthr: float, multiplier: float = 2.0) -> EcmModel:
    """Fold :meth:`EcmModel.update` over the rows of ``X`` in order."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("ecm_fit needs at least one row")
    if y.shape != (X.shape[0],):
        raise ValueError(f"{y.shape[0]} labels for {X.shape[0]} rows")
    model = EcmModel(dthr, multiplier, dim=X.shape[1])
    for x, label in zip(X, y.tolist()):
        model.update(x, label)
    return model

"""Tabular data handling: CSV ingestion, min-max scaling, sampling and
t-statistic feature selection.

All sampling routines draw from ``numpy.random.default_rng(seed)`` (PCG64),
so a given ``(input, seed)`` pair always yields the same rows in the same
order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

CLASSES = (0, 1)


class DataError(ValueError):
    """Raised when input data violates a structural requirement."""


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        n, d = X.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset needs n >= 1 and d >= 1, got n={n}, d={d}")
        if y.shape != (n,):
            raise DataError(f"labels have shape {y.shape}, expected ({n},)")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN or Inf")
        if not np.isin(y, CLASSES).all():
            raise DataError("labels must be 0 or 1")
        names = tuple(self.feature_names or ()) or tuple(f"x{j}" for j in range(d))
        if len(names) != d:
            raise DataError(f"{len(names)} feature names for {d} columns")
        X = X.copy()
        X.flags.writeable = False
        y = y.astype(np.int64)
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=2)

    def take(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return LabeledDataset(self.features[rows], self.labels[rows], self.feature_names)

    def with_features(self, features, feature_names=None) -> "LabeledDataset":
        return LabeledDataset(features, self.labels,
                              self.feature_names if feature_names is None else feature_names)


def breast_cancer_path() -> Path:
    """Path of the bundled Wisconsin Breast Cancer (original, 699 rows) CSV."""
    return Path(str(resources.files("fedpnn") / "data" / "breast_cancer_wisconsin.csv"))


def load_breast_cancer() -> LabeledDataset:
    return load_csv(breast_cancer_path())


def load_csv(path, label_col=-1) -> LabeledDataset:
    """Read a numeric CSV with a header row.

    ``label_col`` is a column index (default: last) or a header name.  Row
    numbers in diagnostics count data rows from 1, excluding the header.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise DataError(f"{path}: empty file (no header row)")
        header = [h.strip() for h in header]
        label_idx = _resolve_label_column(header, label_col)
        if len(header) < 2:
            raise DataError(f"{path}: need at least one feature column and a label column")
        feat_idx = [j for j in range(len(header)) if j != label_idx]

        rows, labels = [], []
        for r, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DataError(f"{path}: row {r} has {len(record)} cells, expected {len(header)}")
            values = []
            for j in range(len(header)):
                cell = record[j].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at row {r}, column {header[j]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: non-finite value at row {r}, column {header[j]!r}")
                values.append(v)
            label = values[label_idx]
            if label not in (0.0, 1.0):
                raise DataError(f"{path}: label outside {{0,1}} at row {r} (value {record[label_idx].strip()})")
            labels.append(int(label))
            rows.append([values[j] for j in feat_idx])

    if not rows:
        raise DataError(f"{path}: empty file (header but no data rows)")
    return LabeledDataset(np.array(rows, dtype=float), np.array(labels),
                          tuple(header[j] for j in feat_idx))


def _resolve_label_column(header, label_col) -> int:
    if isinstance(label_col, str):
        try:
            return int(label_col) % len(header)
        except ValueError:
            pass
        if label_col not in header:
            raise DataError(f"label column {label_col!r} not in header")
        return header.index(label_col)
    if not -len(header) <= label_col < len(header):
        raise DataError(f"label column index {label_col} out of range for {len(header)} columns")
    return label_col % len(header)


def save_csv(ds: LabeledDataset, path, label_name="label"):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*ds.feature_names, label_name])
        for x, y in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


# -- normalization -----------------------------------------------------------

@dataclass(frozen=True)
class NormalizationParams:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=float)
        hi = np.asarray(self.maximum, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DataError("minimum and maximum must be vectors of equal length")
        if np.any(lo > hi):
            raise DataError("minimum exceeds maximum")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)


def normalize_fit(train: LabeledDataset) -> NormalizationParams:
    return NormalizationParams(train.features.min(axis=0), train.features.max(axis=0))


def normalize_apply(params: NormalizationParams, data: LabeledDataset) -> LabeledDataset:
    """Min-max scale into [0, 1].

    Values outside the fitted range are clamped; constant columns map to 0.
    """
    if params.minimum.shape[0] != data.d:
        raise DataError(f"normalization fitted on {params.minimum.shape[0]} columns, data has {data.d}")
    span = params.maximum - params.minimum
    constant = span == 0
    scaled = (data.features - params.minimum) / np.where(constant, 1.0, span)
    scaled[:, constant] = 0.0
    return data.with_features(np.clip(scaled, 0.0, 1.0))


# -- sampling ----------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _apportion(total: int, counts: np.ndarray) -> np.ndarray:
    """Split ``total`` over classes proportionally (largest remainder)."""
    exact = counts * total / counts.sum()
    quota = np.floor(exact).astype(np.int64)
    remainder = exact - quota
    # stable sort keeps the lower class first among equal remainders
    for c in np.argsort(-remainder, kind="stable")[: total - quota.sum()]:
        quota[c] += 1
    return quota


@dataclass(frozen=True)
class PartitionPlan:
    server_rows: np.ndarray
    client_rows: tuple[np.ndarray, ...]
    seed: int
    b_percent: float

    @property
    def num_clients(self) -> int:
        return len(self.client_rows)

    def to_manifest(self) -> str:
        lines = [f"seed={self.seed}", f"b_percent={self.b_percent!r}",
                 "server=" + ",".join(map(str, self.server_rows))]
        for k, rows in enumerate(self.client_rows, start=1):
            lines.append(f"client_{k}=" + ",".join(map(str, rows)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_manifest(cls, text: str) -> "PartitionPlan":
        fields = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DataError(f"malformed manifest line: {line!r}")
            fields[key.strip()] = value.strip()

        def rows(value):
            return np.array([int(v) for v in value.split(",") if v], dtype=np.int64)

        try:
            clients = []
            k = 1
            while f"client_{k}" in fields:
                clients.append(rows(fields[f"client_{k}"]))
                k += 1
            return cls(rows(fields["server"]), tuple(clients),
                       int(fields["seed"]), float(fields["b_percent"]))
        except KeyError as exc:
            raise DataError(f"manifest is missing field {exc.args[0]!r}") from None


def partition(ds: LabeledDataset, num_clients: int, b_percent: float = 10.0, seed: int = 0,
              sharding: str = "simple-random") -> PartitionPlan:
    """Reserve ``b_percent`` of the rows for the server, share the rest among clients.

    The server reserve is a stratified random sample of ``round(n * b / 100)``
    rows.  The remainder goes to the clients either by simple random sampling
    (``sharding="simple-random"``) or class by class (``"stratified"``); shard
    sizes differ by at most one row in both modes.  Row indices in each shard
    are returned sorted.
    """
    if num_clients < 1:
        raise DataError(f"need at least one client, got {num_clients}")
    if not 0 < b_percent < 100:
        raise DataError(f"b_percent must lie in (0, 100), got {b_percent}")
    if sharding not in ("simple-random", "stratified"):
        raise DataError(f"unknown sharding mode {sharding!r}")
    counts = ds.class_counts()
    for c in CLASSES:
        if counts[c] < num_clients + 1:
            raise DataError(
                f"class {c} has {counts[c]} rows; at least {num_clients + 1} needed "
                f"to stratify over a server and {num_clients} client(s)")

    rng = np.random.default_rng(seed)
    quota = _apportion(_round_half_up(ds.n * b_percent / 100), counts)
    server, rest_by_class = [], []
    for c in CLASSES:
        members = rng.permutation(np.flatnonzero(ds.labels == c))
        server.append(members[: quota[c]])
        rest_by_class.append(members[quota[c]:])

    if sharding == "simple-random":
        rest = rng.permutation(np.concatenate(rest_by_class))
        shards = np.array_split(rest, num_clients)
    else:
        # deal class-ordered rows round robin: per-class counts differ by <= 1
        rest = np.concatenate(rest_by_class)
        shards = [rest[k::num_clients] for k in range(num_clients)]

    return PartitionPlan(np.sort(np.concatenate(server)),
                         tuple(np.sort(s) for s in shards), int(seed), float(b_percent))


def stratified_split(ds: LabeledDataset, train_frac: float = 0.8, seed: int = 0):
    """Stratified train/test split.

    Each class contributes ``round(n_c * train_frac)`` rows to the training
    half (at least one row to each half).  Both halves come back in the random
    order in which they were drawn, which is also the order ECM will see them.
    """
    if not 0 < train_frac < 1:
        raise DataError(f"train_frac must lie in (0, 1), got {train_frac}")
    counts = ds.class_counts()
    for c in CLASSES:
        if 0 < counts[c] < 2:
            raise DataError(f"class {c} has {counts[c]} row(s); at least 2 needed to split")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in CLASSES:
        members = rng.permutation(np.flatnonzero(ds.labels == c))
        if members.size == 0:
            continue
        n_train = min(max(_round_half_up(members.size * train_frac), 1), members.size - 1)
        train.append(members[:n_train])
        test.append(members[n_train:])
    train_rows = rng.permutation(np.concatenate(train))
    test_rows = rng.permutation(np.concatenate(test))
    return ds.take(train_rows), ds.take(test_rows)


# -- feature selection -------------------------------------------------------

def welch_t_statistics(ds: LabeledDataset) -> np.ndarray:
    """Per-feature Welch t statistic, class 1 minus class 0."""
    counts = ds.class_counts()
    if np.any(counts == 0):
        raise DataError("t-statistic needs both classes present")
    a = ds.features[ds.labels == 1]
    b = ds.features[ds.labels == 0]
    ddof_a = 1 if a.shape[0] > 1 else 0
    ddof_b = 1 if b.shape[0] > 1 else 0
    se = np.sqrt(a.var(axis=0, ddof=ddof_a) / a.shape[0] + b.var(axis=0, ddof=ddof_b) / b.shape[0])
    diff = a.mean(axis=0) - b.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, diff / np.where(se > 0, se, 1.0), 0.0)
    return t


def select_features_tstat(ds: LabeledDataset, k: int) -> LabeledDataset:
    """Keep the ``k`` features with the largest ``|t|``, in their original order.

    Ties go to the lower column index.
    """
    if not 1 <= k <= ds.d:
        raise DataError(f"k must lie in [1, {ds.d}], got {k}")
    t = np.abs(welch_t_statistics(ds))
    keep = np.sort(np.argsort(-t, kind="stable")[:k])
    return ds.with_features(ds.features[:, keep], tuple(ds.feature_names[j] for j in keep))

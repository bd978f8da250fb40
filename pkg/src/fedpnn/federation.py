"""One-shot federated PNN, simulated in process.

Clients cluster their private rows with ECM and upload only the resulting
centers.  The server re-clusters the union of those centers (meta-clustering),
scores the meta model on its reserved rows and broadcasts the meta centers
back, where each client re-scores its own test split.  Exactly one upload per
client and one broadcast per client cross the simulated network, and only as
serialized :class:`ClientUpdate` messages.

Node ids: the server is 0, clients are 1..K.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import (DataError, LabeledDataset, NormalizationParams, normalize_apply,
                      normalize_fit, partition, stratified_split)
from .ecm import NUM_CLASSES, Cluster, EcmModel, cluster_label
from .pnn import DEFAULT_SIGMA, evaluate, pnn_from_clusters

MESSAGE_VERSION = 1
SERVER_ID = 0


class FederationError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class MessageError(ValueError):
    pass


@dataclass(frozen=True)
class FederationConfig:
    num_clients: int = 2
    b_percent: float = 10.0
    client_dthr: float = 0.19
    server_dthr: float = 0.17
    multiplier: float = 2.0
    sigma: float = DEFAULT_SIGMA
    train_frac: float = 0.8
    seed: int = 0
    client_sharding: str = "simple-random"
    client_dthr_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "client_dthr_overrides",
                           {int(k): float(v) for k, v in dict(self.client_dthr_overrides).items()})
        self.validate()

    def validate(self):
        if not isinstance(self.num_clients, int) or self.num_clients < 1:
            raise ValueError(f"num_clients must be an integer >= 1, got {self.num_clients!r}")
        if not 0 < self.b_percent < 100:
            raise ValueError(f"b_percent must lie in (0, 100), got {self.b_percent}")
        for name, value in [("client_dthr", self.client_dthr), ("server_dthr", self.server_dthr),
                            *((f"client_dthr_overrides[{k}]", v)
                              for k, v in self.client_dthr_overrides.items())]:
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        for k in self.client_dthr_overrides:
            if not 1 <= k <= self.num_clients:
                raise ValueError(f"override for unknown client {k}")
        if self.multiplier <= 0:
            raise ValueError(f"multiplier must be positive, got {self.multiplier}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.train_frac < 1:
            raise ValueError(f"train_frac must lie in (0, 1), got {self.train_frac}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.client_sharding not in ("simple-random", "stratified"):
            raise ValueError(f"client_sharding must be 'simple-random' or 'stratified', "
                             f"got {self.client_sharding!r}")

    def dthr_for(self, client_id: int) -> float:
        return self.client_dthr_overrides.get(client_id, self.client_dthr)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["client_dthr_overrides"] = {str(k): v for k, v in sorted(self.client_dthr_overrides.items())}
        return d


# -- wire format -------------------------------------------------------------

@dataclass(frozen=True)
class ClientUpdate:
    client_id: int
    centers: np.ndarray
    radii: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        radii = np.asarray(self.radii, dtype=float)
        freqs = np.asarray(self.freqs, dtype=np.int64)
        if centers.ndim != 2 or centers.shape[0] == 0:
            raise MessageError("an update needs at least one center")
        m = centers.shape[0]
        if radii.shape != (m,) or freqs.shape != (m, NUM_CLASSES):
            raise MessageError("centers, radii and freqs disagree in length")
        if np.any(freqs < 0) or np.any(freqs.sum(axis=1) < 1):
            raise MessageError("every center needs non-negative counts with a positive total")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(radii))):
            raise MessageError("non-finite value in update")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "freqs", freqs)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @classmethod
    def from_clusters(cls, client_id: int, clusters: list[Cluster]) -> "ClientUpdate":
        if not clusters:
            raise MessageError("an update needs at least one center")
        return cls(client_id, np.array([c.center for c in clusters]),
                   np.array([c.radius for c in clusters]), np.array([c.freq for c in clusters]))

    def clusters(self) -> list[Cluster]:
        return [Cluster(self.centers[i].copy(), float(self.radii[i]), self.freqs[i].copy())
                for i in range(self.centers.shape[0])]

    def __eq__(self, other):
        if not isinstance(other, ClientUpdate):
            return NotImplemented
        return (self.client_id == other.client_id and self.centers.shape == other.centers.shape
                and np.array_equal(self.centers, other.centers)
                and np.array_equal(self.radii, other.radii)
                and np.array_equal(self.freqs, other.freqs))


def serialize_update(update: ClientUpdate) -> bytes:
    """Encode as UTF-8 JSON. Floats use the shortest round-trip decimal form."""
    record = {
        "version": MESSAGE_VERSION,
        "client_id": int(update.client_id),
        "dim": int(update.dim),
        "centers": [
            {"center": [float(v) for v in c], "radius": float(r), "freq": [int(f) for f in q]}
            for c, r, q in zip(update.centers, update.radii, update.freqs)
        ],
    }
    return json.dumps(record, separators=(",", ":")).encode("utf-8")


def deserialize_update(payload: bytes) -> ClientUpdate:
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MessageError(f"message is not UTF-8 (offset {exc.start})") from None
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MessageError(f"malformed message at offset {exc.pos}: {exc.msg}") from None
    if not isinstance(record, dict):
        raise MessageError("message must be a JSON object")
    missing = {"version", "client_id", "dim", "centers"} - record.keys()
    if missing:
        raise MessageError(f"message lacks field(s) {sorted(missing)}")
    if record["version"] != MESSAGE_VERSION:
        raise MessageError(f"unsupported message version {record['version']!r}")
    dim = record["dim"]
    if not _is_int(dim) or dim < 1 or not _is_int(record["client_id"]):
        raise MessageError("dim and client_id must be integers (dim >= 1)")
    entries = record["centers"]
    if not isinstance(entries, list) or not entries:
        raise MessageError("message carries no centers")
    centers, radii, freqs = [], [], []
    for i, entry in enumerate(entries):
        try:
            center, radius, freq = entry["center"], entry["radius"], entry["freq"]
        except (TypeError, KeyError):
            raise MessageError(f"center {i} lacks center/radius/freq") from None
        if not isinstance(center, list) or len(center) != dim:
            raise MessageError(f"center {i} has dimension {len(center) if isinstance(center, list) else '?'}, "
                               f"header says {dim}")
        if not all(_is_number(v) for v in center) or not _is_number(radius):
            raise MessageError(f"center {i} holds a non-numeric coordinate or radius")
        if not isinstance(freq, list) or len(freq) != NUM_CLASSES or not all(_is_int(f) for f in freq):
            raise MessageError(f"center {i} needs two integer class counts")
        centers.append(center)
        radii.append(radius)
        freqs.append(freq)
    return ClientUpdate(record["client_id"], np.array(centers, dtype=float),
                        np.array(radii, dtype=float), np.array(freqs, dtype=np.int64))


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class Channel:
    """Counts and carries serialized messages between nodes."""

    def __init__(self):
        self.messages = 0
        self.bytes = 0

    def send(self, update: ClientUpdate) -> ClientUpdate:
        payload = serialize_update(update)
        self.messages += 1
        self.bytes += len(payload)
        return deserialize_update(payload)


# -- nodes -------------------------------------------------------------------

def center_counts(clusters: list[Cluster]) -> tuple[int, int]:
    """Number of (negative, positive) majority-labelled clusters."""
    labels = [cluster_label(c) for c in clusters]
    return labels.count(0), labels.count(1)


class LocalClient:
    """A client and the private state it keeps between the two exchanges."""

    def __init__(self, client_id: int, data: LabeledDataset, cfg: FederationConfig, seed: int):
        if data.n == 0:
            raise DataError(f"client {client_id} received no rows")
        if np.any(data.class_counts() == 0):
            raise DataError(f"client {client_id} holds a single class; both are required")
        self.client_id = client_id
        self.cfg = cfg
        train, test = stratified_split(data, cfg.train_frac, seed)
        self.params: NormalizationParams = normalize_fit(train)
        self.train = normalize_apply(self.params, train)
        self.test = normalize_apply(self.params, test)
        self.model: EcmModel | None = None
        self.local_auc: float | None = None

    def update(self) -> ClientUpdate:
        self.model = EcmModel(self.cfg.dthr_for(self.client_id), self.cfg.multiplier, dim=self.train.d)
        for x, label in zip(self.train.features, self.train.labels.tolist()):
            self.model.update(x, label)
        clusters = self.model.clusters
        self.local_auc = evaluate(pnn_from_clusters(clusters, self.cfg.sigma), self.test)
        return ClientUpdate.from_clusters(self.client_id, clusters)

    def reevaluate(self, meta: list[Cluster]) -> float:
        return evaluate(pnn_from_clusters(meta, self.cfg.sigma), self.test)


def client_update(local: LabeledDataset, cfg: FederationConfig, client_seed: int,
                  client_id: int = 1) -> tuple[ClientUpdate, float]:
    client = LocalClient(client_id, local, cfg, client_seed)
    update = client.update()
    return update, client.local_auc


def meta_cluster(updates: list[ClientUpdate], server_dthr: float,
                 multiplier: float = 2.0) -> list[Cluster]:
    """Run ECM over all client centers, clients in id order.

    Every center carries its client's class counts into the meta cluster it
    joins, so total counts are conserved exactly.
    """
    if not updates:
        raise ValueError("meta-clustering needs at least one client update")
    dims = {u.dim for u in updates}
    if len(dims) != 1:
        raise ValueError(f"client updates disagree in dimension: {sorted(dims)}")
    model = EcmModel(server_dthr, multiplier, dim=dims.pop())
    for u in sorted(updates, key=lambda u: u.client_id):
        for center, freq in zip(u.centers, u.freqs):
            model.absorb(center, freq)
    return model.clusters


def server_evaluate(meta: list[Cluster], server_data: LabeledDataset, sigma: float = DEFAULT_SIGMA) -> float:
    """Score the meta model on the server reserve (already normalized)."""
    return evaluate(pnn_from_clusters(meta, sigma), server_data)


def broadcast_and_reevaluate(meta: list[Cluster], clients: list[LocalClient]) -> list[float]:
    if not meta:
        raise ValueError("nothing to broadcast")
    return [c.reevaluate(meta) for c in clients]


# -- orchestration -----------------------------------------------------------

@dataclass
class FederationReport:
    config: FederationConfig
    local_auc: list[float]
    global_auc: list[float]
    server_auc: float
    local_centers: list[tuple[int, int]]
    meta_centers: tuple[int, int]
    messages: int
    server_rows: int
    client_rows: list[int]

    def to_dict(self) -> dict:
        clients = [
            {"node": f"client_{k}", "rows": self.client_rows[k - 1],
             "local_auc": self.local_auc[k - 1],
             "local_centers": _fmt_counts(self.local_centers[k - 1]),
             "global_auc": self.global_auc[k - 1],
             "meta_centers": _fmt_counts(self.meta_centers)}
            for k in range(1, len(self.local_auc) + 1)
        ]
        server = {"node": "server", "rows": self.server_rows, "local_auc": None,
                  "local_centers": None, "global_auc": self.server_auc,
                  "meta_centers": _fmt_counts(self.meta_centers)}
        return {"config": self.config.to_dict(), "messages": self.messages,
                "nodes": clients + [server]}

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def format_table(self) -> str:
        lines = [f"{'node':<10} {'local AUC':>10} {'centers':>10} {'meta AUC':>10} {'meta centers':>13}"]
        for row in self.to_dict()["nodes"]:
            local = "-" if row["local_auc"] is None else f"{row['local_auc']:.4f}"
            lines.append(f"{row['node']:<10} {local:>10} {row['local_centers'] or '-':>10} "
                         f"{row['global_auc']:>10.4f} {row['meta_centers']:>13}")
        return "\n".join(lines)


def _fmt_counts(counts) -> str:
    return f"({counts[0]}; {counts[1]})"


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except FederationError:
        raise
    except (ValueError, RuntimeError) as exc:
        raise FederationError(name, str(exc)) from exc


def run_one_shot(ds: LabeledDataset, cfg: FederationConfig, max_workers: int | None = None) -> FederationReport:
    """Partition, train clients, meta-cluster, evaluate and broadcast once."""
    plan = _stage("partition", partition, ds, cfg.num_clients, cfg.b_percent, cfg.seed, cfg.client_sharding)
    client_seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.num_clients).tolist()

    def make_and_update(k):
        client = LocalClient(k, ds.take(plan.client_rows[k - 1]), cfg, client_seeds[k - 1])
        return client, client.update()

    ids = range(1, cfg.num_clients + 1)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = _stage("client_update", lambda: list(pool.map(make_and_update, ids)))
    clients = [c for c, _ in results]

    channel = Channel()
    received = [channel.send(u) for _, u in results]
    meta = _stage("meta_cluster", meta_cluster, received, cfg.server_dthr, cfg.multiplier)

    reserve = ds.take(plan.server_rows)
    reserve = normalize_apply(normalize_fit(reserve), reserve)
    server_auc = _stage("server_evaluate", server_evaluate, meta, reserve, cfg.sigma)

    broadcast = ClientUpdate.from_clusters(SERVER_ID, meta)
    delivered = [channel.send(broadcast).clusters() for _ in clients]
    global_auc = _stage("broadcast", lambda: [c.reevaluate(m) for c, m in zip(clients, delivered)])

    assert channel.messages == 2 * cfg.num_clients
    return FederationReport(
        config=cfg,
        local_auc=[c.local_auc for c in clients],
        global_auc=global_auc,
        server_auc=server_auc,
        local_centers=[center_counts(c.model.clusters) for c in clients],
        meta_centers=center_counts(meta),
        messages=channel.messages,
        server_rows=int(plan.server_rows.size),
        client_rows=[int(r.size) for r in plan.client_rows],
    )


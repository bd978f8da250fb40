import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedpnn.dataset import DataError, LabeledDataset, load_breast_cancer
from fedpnn.ecm import Cluster, ecm_fit
from fedpnn.federation import (ClientUpdate, FederationConfig, FederationError, LocalClient,
                               MessageError, broadcast_and_reevaluate, client_update,
                               deserialize_update, meta_cluster, run_one_shot, serialize_update,
                               server_evaluate)
from fedpnn.pnn import EmptyClassError

from oracles import parzen_predict


@pytest.fixture(scope="module")
def breast_cancer():
    return load_breast_cancer()


def random_update(rng, client_id=1, m=None, d=None):
    m = m or int(rng.integers(1, 12))
    d = d or int(rng.integers(1, 8))
    return ClientUpdate(client_id, rng.random((m, d)), rng.random(m) * 0.3,
                        rng.integers(0, 50, (m, 2)) + np.array([1, 0]))


def blobs(n, d=3, seed=0, gap=0.5):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n // 2, int), np.ones(n - n // 2, int)]
    X = rng.normal(scale=0.1, size=(n, d)) + gap * y[:, None]
    return LabeledDataset(X, y)


# -- config -------------------------------------------------------------------

def test_config_defaults_and_validation():
    cfg = FederationConfig()
    assert (cfg.num_clients, cfg.b_percent, cfg.train_frac, cfg.multiplier, cfg.sigma) == (2, 10.0, 0.8, 2.0, 0.1)
    for bad in [dict(num_clients=0), dict(b_percent=100), dict(client_dthr=0), dict(server_dthr=1.0),
                dict(train_frac=1.0), dict(sigma=0), dict(client_sharding="iid"),
                dict(client_dthr_overrides={5: 0.1})]:
        with pytest.raises(ValueError):
            FederationConfig(**bad)


def test_per_client_dthr_override():
    cfg = FederationConfig(client_dthr=0.2, client_dthr_overrides={"2": 0.05})
    assert cfg.dthr_for(1) == 0.2 and cfg.dthr_for(2) == 0.05


# -- messages ------------------------------------------------------------------

def test_roundtrip_random_updates():
    rng = np.random.default_rng(0)
    for _ in range(200):
        u = random_update(rng, client_id=int(rng.integers(0, 9)))
        assert deserialize_update(serialize_update(u)) == u


def test_roundtrip_awkward_floats():
    u = ClientUpdate(3, np.array([[0.1, 1 / 3, 5e-324, 1 - 2**-53]]), np.array([0.07]), np.array([[1, 2]]))
    back = deserialize_update(serialize_update(u))
    assert back.centers.tobytes() == u.centers.tobytes()


def test_empty_update_rejected():
    with pytest.raises(MessageError):
        ClientUpdate(1, np.empty((0, 2)), np.empty(0), np.empty((0, 2)))
    payload = json.dumps({"version": 1, "client_id": 1, "dim": 2, "centers": []}).encode()
    with pytest.raises(MessageError, match="no centers"):
        deserialize_update(payload)


def test_truncated_payload_reports_offset():
    payload = serialize_update(random_update(np.random.default_rng(1)))
    with pytest.raises(MessageError, match=r"offset \d+"):
        deserialize_update(payload[: len(payload) // 2])


def test_version_and_dimension_checks():
    record = json.loads(serialize_update(random_update(np.random.default_rng(2), d=3)))
    record["version"] = 2
    with pytest.raises(MessageError, match="version"):
        deserialize_update(json.dumps(record).encode())
    record["version"] = 1
    record["dim"] = 4
    with pytest.raises(MessageError, match="dimension"):
        deserialize_update(json.dumps(record).encode())


def test_bad_freq_rejected():
    record = {"version": 1, "client_id": 1, "dim": 1,
              "centers": [{"center": [0.1], "radius": 0.0, "freq": [0, 0]}]}
    with pytest.raises(MessageError):
        deserialize_update(json.dumps(record).encode())


# -- client ---------------------------------------------------------------------

def test_client_update_basic():
    update, auc = client_update(blobs(80), FederationConfig(client_dthr=0.1), client_seed=4)
    assert 0.0 <= auc <= 1.0
    assert update.freqs.sum() == 64  # 80% of 80 rows
    assert update.centers.min() >= 0 and update.centers.max() <= 1


def test_client_single_class_rejected():
    ds = LabeledDataset(np.random.default_rng(0).random((10, 2)), np.zeros(10, int))
    with pytest.raises(DataError, match="single class"):
        client_update(ds, FederationConfig(), client_seed=0)


def test_client_tiny_dthr_keeps_every_row():
    ds = blobs(60, seed=2)
    update, _ = client_update(ds, FederationConfig(client_dthr=1e-9), client_seed=1)
    assert update.centers.shape[0] == 48


def test_client_local_auc_matches_parzen_oracle():
    ds = blobs(50, d=2, seed=5, gap=0.15)
    cfg = FederationConfig(client_dthr=1e-9, sigma=0.2)
    client = LocalClient(1, ds, cfg, seed=3)
    client.update()
    preds = [parzen_predict(client.train.features.tolist(), client.train.labels.tolist(), x, 0.2)
             for x in client.test.features.tolist()]
    y = client.test.labels
    tp = sum(p == 1 and t == 1 for p, t in zip(preds, y))
    tn = sum(p == 0 and t == 0 for p, t in zip(preds, y))
    expected = (tp / (y == 1).sum() + tn / (y == 0).sum()) / 2
    assert client.local_auc == pytest.approx(expected, abs=1e-12)


# -- server ---------------------------------------------------------------------

def test_meta_single_client_identity():
    rng = np.random.default_rng(3)
    u = ClientUpdate.from_clusters(1, ecm_fit(rng.random((40, 3)), rng.integers(0, 2, 40), 0.15).clusters)
    meta = meta_cluster([u], 1e-6)
    assert np.array_equal(np.array([c.center for c in meta]), u.centers)
    assert np.array_equal(np.array([c.freq for c in meta]), u.freqs)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.floats(0.01, 0.5), st.integers(0, 2**32 - 1))
def test_meta_conserves_counts_and_bounds_radius(k, dthr, seed):
    rng = np.random.default_rng(seed)
    updates = [random_update(rng, client_id=i, d=4) for i in range(k, 0, -1)]
    meta = meta_cluster(updates, dthr)
    assert sum(c.freq.sum() for c in meta) == sum(u.freqs.sum() for u in updates)
    assert all(c.radius <= dthr for c in meta)


def test_meta_orders_clients_by_id():
    rng = np.random.default_rng(4)
    a, b = random_update(rng, 1, d=2), random_update(rng, 2, d=2)
    assert meta_cluster([b, a], 0.2) == meta_cluster([a, b], 0.2)


def test_meta_weighted_merge():
    a = ClientUpdate(1, np.array([[0.5, 0.5]]), np.array([0.0]), np.array([[3, 1]]))
    b = ClientUpdate(2, np.array([[0.5, 0.5]]), np.array([0.0]), np.array([[0, 6]]))
    (c,) = meta_cluster([a, b], 0.1)
    assert c.freq.tolist() == [3, 7]


def test_meta_errors():
    with pytest.raises(ValueError):
        meta_cluster([], 0.1)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="dimension"):
        meta_cluster([random_update(rng, 1, d=2), random_update(rng, 2, d=3)], 0.1)


def test_server_evaluate_extremes():
    meta = [Cluster(np.array([0.1]), 0.0, np.array([4, 0])), Cluster(np.array([0.9]), 0.0, np.array([0, 4]))]
    reserve = LabeledDataset(np.array([[0.0], [0.2], [0.8], [1.0]]), np.array([0, 0, 1, 1]))
    assert server_evaluate(meta, reserve, 0.1) == 1.0
    lopsided = [Cluster(np.array([0.5]), 0.0, np.array([4, 0])), Cluster(np.array([50.0]), 0.0, np.array([0, 4]))]
    assert server_evaluate(lopsided, reserve, 0.1) == 0.5


def test_broadcast_same_centers_same_auc():
    ds = blobs(80, seed=7, gap=0.2)
    client = LocalClient(1, ds, FederationConfig(client_dthr=0.1), seed=0)
    update = client.update()
    assert broadcast_and_reevaluate(update.clusters(), [client]) == [client.local_auc]


def test_broadcast_one_class_meta_errors():
    client = LocalClient(1, blobs(40), FederationConfig(), seed=0)
    client.update()
    with pytest.raises(EmptyClassError):
        broadcast_and_reevaluate([Cluster(np.zeros(3), 0.0, np.array([1, 0]))], [client])


# -- end to end ----------------------------------------------------------------

def test_run_breast_cancer_report_shape(breast_cancer):
    report = run_one_shot(breast_cancer, FederationConfig(num_clients=2, client_dthr=0.19, server_dthr=0.17))
    assert len(report.local_auc) == 2 and len(report.global_auc) == 2
    assert 0 <= report.server_auc <= 1
    assert report.messages == 4
    assert report.server_rows == 70 and sum(report.client_rows) == 629
    for neg, pos in report.local_centers:
        assert 5 <= neg + pos <= 100  # tens of centers per client
    nodes = [r["node"] for r in report.to_dict()["nodes"]]
    assert nodes == ["client_1", "client_2", "server"]


def test_run_deterministic(breast_cancer):
    cfg = FederationConfig(seed=11)
    assert run_one_shot(breast_cancer, cfg).to_text() == run_one_shot(breast_cancer, cfg).to_text()


def test_run_thread_count_irrelevant(breast_cancer):
    cfg = FederationConfig(num_clients=3, seed=2)
    assert run_one_shot(breast_cancer, cfg, max_workers=1).to_text() == \
        run_one_shot(breast_cancer, cfg, max_workers=3).to_text()


def test_run_single_client_identity(breast_cancer):
    report = run_one_shot(breast_cancer, FederationConfig(num_clients=1, server_dthr=1e-6, seed=5))
    assert report.global_auc[0] == report.local_auc[0]
    assert report.meta_centers == report.local_centers[0]


def test_run_stage_tagged_errors():
    ds = blobs(30)
    with pytest.raises(FederationError) as info:
        run_one_shot(ds, FederationConfig(num_clients=20))
    assert info.value.stage == "partition"


def test_stratified_sharding_runs(breast_cancer):
    report = run_one_shot(breast_cancer, FederationConfig(num_clients=3, client_sharding="stratified"))
    assert report.messages == 6
    assert max(report.client_rows) - min(report.client_rows) <= 1

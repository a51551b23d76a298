import pytest
from fastapi.testclient import TestClient

from apps.api.main import app

client = TestClient(app)

BELL = [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]

TINY = {
    "name": "tiny-api",
    "model": {"kind": "two_qubit"},
    "baths": [{"site": 1, "alpha": 0.05, "temperature": 0.3, "memory": 2}],
    "evolution": {"delta_t": 0.2, "n_steps": 3},
    "initial_state": {"kind": "basis", "bits": "00"},
    "measures": ["concurrence"],
    "methods": ["full"],
}


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["ok"] is True


def test_presets():
    names = [p["name"] for p in client.get("/presets").json()["presets"]]
    assert "pair-equilibrium" in names
    assert client.get("/presets/chain-closed").json()["model"]["kind"] == "aa_chain"
    assert client.get("/presets/nope").status_code == 400


def test_measures_of_a_bell_state():
    r = client.post("/measures", json={"rho": BELL})
    assert r.status_code == 200
    body = r.json()
    assert body["concurrence"] == pytest.approx(1.0)
    assert body["discord"] == pytest.approx(0.5)
    assert body["useful_for_teleportation"] is True


def test_measures_accept_split_parts():
    r = client.post("/measures", json={"rho": {"re": BELL, "im": [[0] * 4] * 4}})
    assert r.json()["coherence"] == pytest.approx(1.0)


@pytest.mark.parametrize("rho", [[[1, 0], [0]], [[1, 0, 0]], "x", [[2, 0], [0, 0]]])
def test_measures_reject_bad_matrices(rho):
    assert client.post("/measures", json={"rho": rho}).status_code == 400


def test_imbalance():
    neel = [0.0] * 16
    neel[int("1010", 2)] = 1.0
    r = client.post("/measures/imbalance", json={"state": neel})
    assert r.json() == {"n_sites": 4, "imbalance": pytest.approx(1.0)}
    assert client.post("/measures/imbalance", json={"state": [1, 0, 0]}).status_code == 400
    assert client.post("/measures/imbalance", json={"state": [1, 0, 0, 0]}).status_code == 422


def test_eta_table():
    r = client.post("/experiments/eta", json={"n_steps": 4, "memory": 2})
    assert r.status_code == 200
    body = r.json()
    assert body["memory_cutoff"] == 2
    assert len(body["checksum"]) == 64
    assert set(body["entries"]) == {"interior", "start", "end", "end_to_start"}
    assert set(body) == {"checksum", "spectral", "temperature", "delta_t", "n_steps", "memory_cutoff", "entries"}
    assert body["spectral"]["family"] == "exponential"
    assert client.post("/experiments/eta", json={"n_steps": 2, "memory": 3}).status_code == 400


def test_run_inline_config():
    r = client.post("/experiments/run", json={"config": TINY, "write": False})
    assert r.status_code == 200
    body = r.json()
    assert body["name"] == "tiny-api"
    assert body["panels"][0]["methods"]["full"]["n_steps"] == 3
    assert body["files"] == []


def test_run_with_overrides():
    r = client.post("/experiments/run", json={"config": TINY, "overrides": {"baths.0.memory": 3}, "write": False})
    assert r.json()["panels"][0]["process_tensors"]["1"]["memory_cutoff"] == 3


@pytest.mark.parametrize("payload", [{}, {"preset": "pair-equilibrium", "config": TINY}, {"config": {"measures": []}}])
def test_run_rejects_bad_requests(payload):
    assert client.post("/experiments/run", json=dict(payload, write=False)).status_code == 400

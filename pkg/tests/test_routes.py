import json

import pytest


def test_healthcheck(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"message": "Orlicz Lab API is alive"}


def test_young_evaluate(client):
    response = client.get("/api/young/evaluate", params={"phi": "power:2", "t": 3})
    assert response.status_code == 200
    assert response.json() == {"phi": "power:2", "t": 3.0, "value": 9.0}


def test_young_derivative_and_conjugate(client):
    assert client.get("/api/young/derivative", params={"phi": "pop:3", "t": 2}).json()["value"] == 4.0
    response = client.get("/api/young/conjugate", params={"phi": "power:2", "s": 2})
    assert response.json()["value"] == pytest.approx(1.0, rel=1e-8)


def test_bad_phi(client):
    response = client.get("/api/young/evaluate", params={"phi": "cosh", "t": 1})
    assert response.status_code == 422
    assert "cosh" in response.json()["detail"]


def test_doubling(client):
    body = client.get("/api/young/doubling", params={"phi": "expinvsq"}).json()
    assert body["verdict"] == "NotDoublingOnGrid"
    assert body["constant"] is None
    body = client.get("/api/young/doubling", params={"phi": "power:2"}).json()
    assert body["verdict"] == "DoublingOnGrid"
    assert body["constant"] == pytest.approx(4.0)


def test_besov(client):
    response = client.get("/api/young/besov", params={"phi": "power:2", "n": 3})
    assert response.status_code == 200
    assert response.json()["verdict"] == "DivergentLikely"
    assert client.get("/api/young/besov", params={"phi": "power:2", "n": 1}).status_code == 422


def test_orlicz_norm(client):
    response = client.post("/api/orlicz/norm", json={"phi": "power:2", "values": [3, 4]})
    assert response.status_code == 200
    body = response.json()
    assert body["norm"] == pytest.approx(5.0, rel=1e-10)
    assert body["modular"] == 25.0
    assert client.post("/api/orlicz/norm", json={"phi": "power:2", "values": []}).status_code == 422
    bad_weights = {"phi": "power:2", "values": [1, 2], "weights": [1, -1]}
    assert client.post("/api/orlicz/norm", json=bad_weights).status_code == 422


def test_repro_catalogue(client):
    names = client.get("/api/repro/").json()
    assert "f2" in names and "besov" in names
    assert names == sorted(names)


def test_repro_stores_run(client):
    response = client.post("/api/repro/besov", params={"seed": 2})
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["result"]["verdict"] == "ConvergentLikely"

    stored = client.get(f"/api/runs/{body['run_id']}").json()
    assert stored["command"] == "repro besov"
    assert stored["seed"] == 2
    assert json.loads(stored["report"]) == body["report"]

    runs = client.get("/api/runs/", params={"command": "repro besov"}).json()
    assert [run["id"] for run in runs] == [body["run_id"]]


def test_unknown_repro_and_run(client):
    assert client.post("/api/repro/nope").status_code == 404
    assert client.get("/api/runs/999").status_code == 404

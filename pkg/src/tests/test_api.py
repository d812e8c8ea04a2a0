from fastapi.testclient import TestClient

from precedence_scheduler.api.main import app
from precedence_scheduler.core import make_instance

client = TestClient(app)


def _instance(processing, weights, edges=()):
    return make_instance(processing, weights, edges).model_dump(mode="json")


def test_index_lists_policies():
    response = client.get("/")
    assert response.status_code == 200
    assert "equal_share" in response.json()["policies"]


def test_simulate_equal_share():
    response = client.post(
        "/simulate",
        json={"instance": _instance([1, 1], [1, 1]), "policy": {"name": "equal_share"}},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["result"]["objective"] == "4"
    assert body["rho"] == "1"
    assert body["trace"] is None


def test_simulate_with_trace():
    response = client.post(
        "/simulate",
        json={
            "instance": _instance([1, 2], [1, 1]),
            "policy": {"name": "equal_share"},
            "include_trace": True,
        },
    )
    segments = response.json()["trace"]["segments"]
    assert [segment["end"] for segment in segments] == ["2", "3"]


def test_opt():
    body = client.post("/opt", json={"instance": _instance([1, 1], [1, 1])}).json()
    assert body["result"]["objective"] == "3"
    assert body["lower_bound"] is None
    body = client.post("/opt", json={"instance": _instance([1, 1], [1, 1]), "machines": 2}).json()
    assert body["result"]["objective"] == "2"
    assert body["lower_bound"] == "2"


def test_missing_prediction_is_a_bad_request():
    response = client.post(
        "/simulate",
        json={"instance": _instance([1, 1], [1, 1]), "policy": {"name": "wrr_chains"}},
    )
    assert response.status_code == 400
    assert response.json()["error"] == "MissingPredictionError"


def test_invalid_body_is_rejected():
    response = client.post("/opt", json={"instance": _instance([1], [1]), "machines": 0})
    assert response.status_code == 422


def test_run_and_report():
    spec = {
        "name": "api",
        "instances": {"kind": "family", "family": "hidden_chain", "params": {"n": 5, "hidden": 4}},
        "policy": {"name": "equal_share"},
    }
    body = client.post("/run", json={"spec": spec}).json()
    assert body["failures"] == 0
    assert body["rows"][0]["ratio"] == "5/2"
    report = client.post("/report", json={"rows": body["rows"], "format": "summary"}).json()
    assert report["format"] == "summary"
    assert "equal_share" in report["document"]

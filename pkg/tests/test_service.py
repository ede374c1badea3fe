"""HTTP surface: every endpoint, error mapping, strict request models."""

import pytest
from fastapi.testclient import TestClient

from mecprov.service.app import create_app

PLAIN = """\
mesd_version: apmec-sim/1
name: pair
mead: {name: app, vcpus: 1, memory_mb: 256}
nsd:
  vnfs:
  - {type: firewall, instances: 1}
  - {type: dpi, instances: 1}
"""


@pytest.fixture()
def client():
    with TestClient(create_app(capacity_vms=10, reuse_capacity=3)) as test_client:
        yield test_client


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_validate_ok(client):
    response = client.post("/descriptor/validate", json={"document": PLAIN})
    assert response.status_code == 200
    assert response.json() == {"ok": True, "name": "pair", "nf_types": 2, "footprint": 2}


def test_validate_missing_section_maps_to_400(client):
    broken = PLAIN.split("nsd:")[0]
    response = client.post("/descriptor/validate", json={"document": broken})
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["kind"] == "missing_section"
    assert detail["section"] == "nsd"


def test_validate_rejects_unknown_request_fields(client):
    response = client.post("/descriptor/validate", json={"document": PLAIN, "mode": "fast"})
    assert response.status_code == 422


def test_simulate_rows_and_dominance(client):
    response = client.post(
        "/simulation/run",
        json={"max_ns_size": 2, "reuse_capacity": 4, "policy": "both", "seeds": 3},
    )
    assert response.status_code == 200
    body = response.json()
    rows = body["rows"]
    assert len(rows) == 6
    by_seed = {}
    for row in rows:
        by_seed.setdefault(row["seed"], {})[row["policy"]] = row
    for pair in by_seed.values():
        assert pair["cooperation"]["accepted"] >= pair["separation"]["accepted"]
    assert body["csv"].startswith("policy,seed,capacity_vms")


def test_simulate_invalid_config_maps_to_400(client):
    response = client.post("/simulation/run", json={"catalog_size": 2, "max_ns_size": 5})
    assert response.status_code == 400
    assert response.json()["detail"]["kind"] == "invalid_config"


def test_reproduce_fig5a_summary(client):
    response = client.post("/simulation/reproduce", json={"target": "fig5a", "seeds": 2})
    assert response.status_code == 200
    body = response.json()
    assert len(body["points"]) == 6
    assert body["summary"].count("# fig5a") == 6
    for point in body["points"]:
        assert point["coop_mean"] >= point["sep_mean"]


def test_oracle_endpoint(client):
    response = client.post("/oracle/compare", json={"trials": 5})
    assert response.status_code == 200
    body = response.json()
    assert body["violations"] == 0
    assert body["report"].strip().endswith("mean_ratio=1.000")


def test_oracle_budget_exceeded_maps_to_400(client):
    response = client.post(
        "/oracle/compare",
        json={"trials": 1, "catalog_size": 3, "requests": 5, "size_max": 3,
              "count_max": 2, "capacity_vms": 20, "max_nodes": 5},
    )
    assert response.status_code == 400
    assert response.json()["detail"]["kind"] == "budget_exceeded"


def test_mes_lifecycle_over_http(client):
    created = client.post("/mes", json={"document": PLAIN})
    assert created.status_code == 201
    mes_id = created.json()["mes_id"]
    assert created.json()["record"]["state"] == "DEPLOYING"

    for target in ("MEA", "NS"):
        response = client.post(
            "/mes/%d/events" % mes_id, json={"target": target, "outcome": "deployed"}
        )
        assert response.status_code == 200
    assert response.json()["state"] == "ACTIVE"

    listing = client.get("/mes").json()
    assert len(listing["records"]) == 1
    assert listing["pools"][0]["used_vms"] == 2

    log = client.get("/mes/%d/log" % mes_id).json()["log"]
    assert "SUBMIT name=pair" in log

    done = client.post("/mes/%d/terminate" % mes_id)
    assert done.json()["state"] == "TERMINATED"
    assert client.get("/mes").json()["pools"][0]["used_vms"] == 0


def test_second_submit_reuses_first(client):
    first = client.post("/mes", json={"document": PLAIN}).json()["mes_id"]
    for target in ("MEA", "NS"):
        client.post("/mes/%d/events" % first, json={"target": target, "outcome": "deployed"})
    second = client.post("/mes", json={"document": PLAIN}).json()
    assert second["record"]["plan"]["new_vms"] == 0
    assert second["record"]["plan"]["reuse_source"] is not None
    assert second["record"]["ns_state"] == "ACTIVE"


def test_capacity_exhaustion_maps_to_409(client):
    # distinct NF types per submit so nothing is reusable: 5 x 2 VMs fill
    # capacity 10, the sixth submit must be refused
    last = None
    for k in range(6):
        document = PLAIN.replace("firewall", "fw%d" % k).replace("dpi", "dpi%d" % k)
        last = client.post("/mes", json={"document": document})
    assert last.status_code == 409
    detail = last.json()["detail"]
    assert detail["kind"] == "insufficient_capacity"
    assert detail["shortfall"] >= 1


def test_unknown_mes_maps_to_404(client):
    assert client.get("/mes/41").status_code == 404
    response = client.post("/mes/41/events", json={"target": "MEA", "outcome": "deployed"})
    assert response.status_code == 404
    assert response.json()["detail"]["kind"] == "unknown_mes_id"


def test_event_after_terminal_maps_to_409(client):
    mes_id = client.post("/mes", json={"document": PLAIN}).json()["mes_id"]
    for target in ("MEA", "NS"):
        client.post("/mes/%d/events" % mes_id, json={"target": target, "outcome": "deployed"})
    client.post("/mes/%d/terminate" % mes_id)
    response = client.post("/mes/%d/heal" % mes_id)
    assert response.status_code == 409
    assert response.json()["detail"]["kind"] == "event_after_terminal"


def test_metric_event_scales_out(client):
    alarmed = PLAIN.replace(
        "mead: {name: app, vcpus: 1, memory_mb: 256}",
        "mead: {name: app, vcpus: 1, memory_mb: 256, alarm: {metric: cpu, threshold: 0.9, action: scale_out}}",
    )
    mes_id = client.post("/mes", json={"document": alarmed}).json()["mes_id"]
    for target in ("MEA", "NS"):
        client.post("/mes/%d/events" % mes_id, json={"target": target, "outcome": "deployed"})
    response = client.post(
        "/mes/%d/events" % mes_id,
        json={"target": "MEA", "outcome": "metric", "metric_name": "cpu", "metric_value": 0.97},
    )
    assert response.json()["state"] == "SCALING"
    response = client.post("/mes/%d/events" % mes_id, json={"target": "MEA", "outcome": "deployed"})
    assert response.json()["state"] == "ACTIVE"
    assert response.json()["mea_instances"] == 2


def test_demo_endpoint_happy_and_failed(client):
    happy = client.post(
        "/demo/orchestrate",
        json={"document": PLAIN, "script": "MEA deployed\nNS deployed\n"},
    ).json()
    assert happy["ok"] is True
    assert happy["final_state"] == "ACTIVE"
    assert happy["log"].splitlines()[-1].endswith("state=ACTIVE instances=1")

    failed = client.post(
        "/demo/orchestrate",
        json={"document": PLAIN, "script": "NS failed\n"},
    ).json()
    assert failed["ok"] is False
    assert failed["final_state"] == "FAILED"
    assert "rollback=2" in failed["log"]


def test_demo_bad_script_maps_to_400(client):
    response = client.post(
        "/demo/orchestrate", json={"document": PLAIN, "script": "VNF exploded\n"}
    )
    assert response.status_code == 400
    assert response.json()["detail"]["kind"] == "invalid_event_script"

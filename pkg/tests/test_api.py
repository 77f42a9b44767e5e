"""Control API contract: endpoints, status codes, safety interlock, ingest."""

import pytest
from fastapi.testclient import TestClient

from wsn_twin.config import ServiceConfig
from wsn_twin.engine import SimulationContext, SimulationEngine
from wsn_twin.scenario import paper_day
from wsn_twin.service import create_app

KEY = "TESTKEY123456789"


def make_client(scenario=None, run=False):
    scenario = scenario or paper_day()
    engine = SimulationEngine(scenario, api_key=KEY)
    if run:
        engine.run_fast()
    context = SimulationContext(engine)
    config = ServiceConfig(api_key=KEY)
    app = create_app(context, config)
    return TestClient(app), engine


# -- Latest ---------------------------------------------------------------------


def test_latest_fresh_boot_all_stale():
    client, _ = make_client()
    body = client.get("/api/readings/latest").json()
    for node in ("node1", "node2", "node3", "node4"):
        assert body["nodes"][node]["stale"] is True
        assert body["nodes"][node]["values"] is None
    assert body["motor"]["speed"] == 0
    assert body["actuators"] == {"sprinkler_on": False, "power_cutoff": False}
    assert [len(row) for row in body["lcd"]] == [16, 16, 16, 16]


def test_latest_after_replay_contains_reference_values():
    client, _ = make_client(run=True)
    body = client.get("/api/readings/latest").json()
    node3 = body["nodes"]["node3"]["values"]
    assert set(node3) == {"temp_c", "humidity_pct"}
    soil = body["nodes"]["node2"]["values"]["adc"]
    assert 0 <= soil <= 1023
    assert body["nodes"]["node1"]["stale"] is False
    assert body["finished"] is True


def test_latest_is_idempotent():
    client, _ = make_client(run=True)
    first = client.get("/api/readings/latest").json()
    second = client.get("/api/readings/latest").json()
    assert first == second


def test_get_endpoints_do_not_mutate():
    client, engine = make_client(run=True)
    before = [r.as_dict() for r in engine.store.records()]
    snap_before = engine.latest_snapshot()
    client.get("/api/readings/latest")
    client.get("/api/readings?node=node2")
    client.get("/api/alarms")
    client.get("/api/commands")
    client.get("/api/ingest/feeds")
    assert [r.as_dict() for r in engine.store.records()] == before
    assert engine.latest_snapshot() == snap_before


# -- History --------------------------------------------------------------------


def test_history_full_window_node2_nine_entries():
    client, _ = make_client(run=True)
    resp = client.get(
        "/api/readings",
        params={"node": "node2", "from": "2020-07-09T10:30:00", "to": "2020-07-09T14:30:00"},
    )
    assert resp.status_code == 200
    entries = resp.json()
    assert len(entries) == 9
    times = [e["t_us"] for e in entries]
    assert times == sorted(times)


def test_history_inverted_range_400():
    client, _ = make_client(run=True)
    resp = client.get(
        "/api/readings",
        params={"from": "2020-07-09T14:30:00", "to": "2020-07-09T10:30:00"},
    )
    assert resp.status_code == 400


def test_history_malformed_range_400():
    client, _ = make_client()
    resp = client.get("/api/readings", params={"from": "not-a-time"})
    assert resp.status_code == 400


def test_history_unknown_node_404():
    client, _ = make_client()
    assert client.get("/api/readings", params={"node": "node9"}).status_code == 404


# -- Motor commands -----------------------------------------------------------------


def test_motor_command_accepted_202():
    client, engine = make_client()
    resp = client.post("/api/motor", json={"speed": 128, "direction": "forward"})
    assert resp.status_code == 202
    body = resp.json()
    assert body["status"] == "pending"
    engine.advance_to(0)
    status = client.get(f"/api/commands/{body['command_id']}").json()
    assert status["status"] == "acknowledged"
    assert engine.motor_node.state.duty_cycle == pytest.approx(128 / 255)


def test_motor_command_out_of_range_400():
    client, _ = make_client()
    assert client.post("/api/motor", json={"speed": 300, "direction": "forward"}).status_code == 400
    assert client.post("/api/motor", json={"speed": -1, "direction": "forward"}).status_code == 400
    assert client.post("/api/motor", json={"speed": 10, "direction": "up"}).status_code == 400
    assert client.post("/api/motor", json={}).status_code == 400


def test_motor_command_409_during_cutoff():
    client, engine = make_client(run=True)  # replay ends with cutoff active
    assert engine.actuators.power_cutoff is True
    resp = client.post("/api/motor", json={"speed": 10, "direction": "forward"})
    assert resp.status_code == 409
    # Clearing via the alarms API re-enables commands.
    clear = client.post("/api/alarms/clear")
    assert clear.status_code == 200
    assert clear.json()["actuators"]["power_cutoff"] is False
    assert client.post("/api/motor", json={"speed": 10, "direction": "forward"}).status_code == 202


def test_unknown_command_404():
    client, _ = make_client()
    assert client.get("/api/commands/99").status_code == 404


# -- Alarm rules ----------------------------------------------------------------------


def test_alarm_rule_roundtrip():
    client, _ = make_client()
    rules = client.get("/api/alarms").json()
    assert rules[0]["id"] == "fire-default"
    body = {
        "node": "node2",
        "field": "adc",
        "comparator": "<",
        "threshold": 150,
        "debounce": 2,
        "actions": ["sprinkler_on"],
        "armed": True,
    }
    resp = client.put("/api/alarms/dry-soil", json=body)
    assert resp.status_code == 200
    listed = {r["id"]: r for r in client.get("/api/alarms").json()}
    assert listed["dry-soil"]["debounce"] == 2


def test_alarm_rule_debounce_zero_400():
    client, _ = make_client()
    body = {
        "node": "node1",
        "field": "adc",
        "comparator": ">",
        "threshold": 0,
        "debounce": 0,
        "actions": ["sprinkler_on"],
    }
    assert client.put("/api/alarms/x", json=body).status_code == 400


def test_alarm_rule_empty_actions_400():
    client, _ = make_client()
    body = {
        "node": "node1",
        "field": "adc",
        "comparator": ">",
        "threshold": 0,
        "actions": [],
    }
    assert client.put("/api/alarms/x", json=body).status_code == 400


def test_disarmed_rule_no_event():
    scenario = paper_day()
    engine = SimulationEngine(scenario, api_key=KEY)
    context = SimulationContext(engine)
    client = TestClient(create_app(context, ServiceConfig(api_key=KEY)))
    rule = dict(client.get("/api/alarms").json()[0])
    rule_id = rule.pop("id")
    rule["armed"] = False
    assert client.put(f"/api/alarms/{rule_id}", json=rule).status_code == 200
    engine.run_fast()
    assert client.get("/api/alarms/events").json() == []
    assert engine.actuators.power_cutoff is False


# -- Ingest -----------------------------------------------------------------------------


def test_ingest_accepts_and_increments_ids():
    client, _ = make_client()
    r1 = client.get("/update", params={"api_key": KEY, "field1": "33", "field2": "70"})
    assert r1.status_code == 200
    assert r1.text == "1"
    r2 = client.get("/update", params={"api_key": KEY, "field1": "34"})
    assert r2.text == "2"
    feeds = client.get("/api/ingest/feeds").json()
    assert feeds[0]["field1"] == "33"
    assert [f["entry_id"] for f in feeds] == [1, 2]


def test_ingest_bad_key_returns_zero():
    client, _ = make_client()
    resp = client.get("/update", params={"api_key": "WRONG", "field1": "1"})
    assert resp.text == "0"
    assert client.get("/api/ingest/feeds").json() == []


def test_ingest_ignores_unknown_params():
    client, _ = make_client()
    resp = client.get("/update", params={"api_key": KEY, "field1": "5", "bogus": "x"})
    assert resp.text == "1"
    feeds = client.get("/api/ingest/feeds").json()
    assert "bogus" not in feeds[0]


def test_gateway_uplink_lands_in_ingest_after_replay():
    client, engine = make_client(run=True)
    feeds = client.get("/api/ingest/feeds").json()
    assert len(feeds) == 9
    # 10:30 truth is ~33C; the sensor error keeps the first uplink within 1.
    assert feeds[0]["field1"] in ("32", "33", "34")

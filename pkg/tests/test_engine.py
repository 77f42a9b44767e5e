"""Full simulation runs: counts, determinism, pacing, command flow, fire response."""

import time

import pytest

from wsn_twin.engine import (
    JOURNAL_FILENAME,
    SUMMARY_FILENAME,
    PacedRunner,
    PowerCutoffActive,
    SimulationContext,
    SimulationEngine,
)
from wsn_twin.frames import Direction
from wsn_twin.gateway import MissingApiKey
from wsn_twin.profile import US_PER_MINUTE
from wsn_twin.scenario import paper_day, parse_scenario

MIN = US_PER_MINUTE
KEY = "TESTKEY123456789"


def small_raw(**overrides) -> dict:
    raw = {
        "name": "small",
        "date": "01-02-2024",
        "run_window": {"start": "10:00", "end": "10:06"},
        "sample_interval_min": 2,
        "seed": 7,
        "profile": {
            "soil_curve": [["10:00", 400], ["10:06", 500]],
            "temp_curve": [["10:00", 25.0]],
            "humidity_curve": [["10:00", 55.0]],
        },
        "alarms": [],
    }
    raw.update(overrides)
    return raw


def run_fast(raw_or_scenario, out_dir=None, api_key=KEY):
    scenario = (
        raw_or_scenario
        if not isinstance(raw_or_scenario, dict)
        else parse_scenario(raw_or_scenario)
    )
    engine = SimulationEngine(scenario, out_dir=out_dir, api_key=api_key)
    engine.run_fast()
    return engine


# -- Reference-day replay ------------------------------------------------------


def test_paper_day_counts():
    engine = run_fast(paper_day())
    counts = engine.reading_counts()
    assert counts["node1"] == counts["node2"] == counts["node3"] == 9
    assert len(engine.alarms.events) == 1
    assert engine.ingest.entries  # uplinks reached the local channel


def test_paper_day_flame_only_in_window():
    engine = run_fast(paper_day())
    flames = engine.store.query_range(node="node1", kind="flame")
    by_clock = {r.clock: r.values["adc"] for r in flames}
    assert set(by_clock) == {
        "10:30", "11:00", "11:30", "12:00", "12:30", "13:00", "13:30", "14:00", "14:30",
    }
    assert by_clock["12:00"] == 1023
    assert all(v == 0 for clock, v in by_clock.items() if clock != "12:00")


def test_paper_day_soil_minimum_at_1300():
    engine = run_fast(paper_day())
    soils = engine.store.query_range(node="node2", kind="soil")
    minimum = min(soils, key=lambda r: r.values["adc"])
    assert minimum.clock == "13:00"


def test_paper_day_fire_response_state():
    engine = run_fast(paper_day())
    event = engine.alarms.events[0]
    assert engine.store.wall_time(event.t_us).strftime("%H:%M") == "12:00"
    assert [a.action for a in event.actions] == [
        "motor_stop",
        "sprinkler_on",
        "power_cutoff_flag",
    ]
    assert all(a.outcome in ("acknowledged", "on") for a in event.actions)
    assert engine.motor_node.state.speed_pwm == 0
    assert engine.actuators.sprinkler_on is True
    assert engine.actuators.power_cutoff is True
    with pytest.raises(PowerCutoffActive):
        engine.submit_motor_command(10, Direction.FORWARD)


def test_paper_day_dht_within_one_of_anchor_truth():
    engine = run_fast(paper_day())
    dhts = engine.store.query_range(node="node3", kind="dht")
    assert len(dhts) == 9
    for record in dhts:
        assert 0 <= record.values["temp_c"] <= 50
        assert 20 <= record.values["humidity_pct"] <= 90


def test_uplink_entries_match_instants():
    engine = run_fast(paper_day())
    assert len(engine.ingest.entries) == 9
    ids = [e.entry_id for e in engine.ingest.entries]
    assert ids == sorted(ids) and len(set(ids)) == len(ids)
    first = engine.ingest.entries[0].fields
    assert first["field1"] and first["field3"]


def test_missing_api_key_fails_fast():
    with pytest.raises(MissingApiKey):
        SimulationEngine(paper_day(), api_key="")


# -- Determinism -----------------------------------------------------------------


def test_same_seed_byte_identical_artifacts(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    engine_a = run_fast(paper_day(), out_dir=a_dir)
    engine_b = run_fast(paper_day(), out_dir=b_dir)
    journal_a = (a_dir / JOURNAL_FILENAME).read_bytes()
    journal_b = (b_dir / JOURNAL_FILENAME).read_bytes()
    assert journal_a == journal_b
    assert (a_dir / SUMMARY_FILENAME).read_bytes() == (b_dir / SUMMARY_FILENAME).read_bytes()
    assert engine_a.store.export_csv() == engine_b.store.export_csv()


def test_different_seed_changes_journal(tmp_path):
    raw = small_raw(loss={"probability": 0.4})
    a = run_fast(raw, out_dir=tmp_path / "a")
    raw2 = small_raw(seed=8, loss={"probability": 0.4})
    b = run_fast(raw2, out_dir=tmp_path / "b")
    # Loss draws differ, so delivery stats almost surely differ; at minimum
    # the journals record the differing seeds' outcomes deterministically.
    assert (
        a.summary()["medium"]["delivered"] != b.summary()["medium"]["delivered"]
        or (tmp_path / "a" / JOURNAL_FILENAME).read_bytes()
        != (tmp_path / "b" / JOURNAL_FILENAME).read_bytes()
    )


def test_total_loss_zero_readings():
    engine = run_fast(small_raw(loss={"probability": 1.0}))
    assert sum(engine.reading_counts().values()) == 0
    summary = engine.summary()
    assert summary["delivery_failure_rate"] == 1.0
    assert summary["records_total"] == 0


# -- Pacing ------------------------------------------------------------------------


def test_paced_and_fast_journals_identical(tmp_path):
    fast_engine = run_fast(small_raw(), out_dir=tmp_path / "fast")

    scenario = parse_scenario(small_raw())
    paced_engine = SimulationEngine(scenario, out_dir=tmp_path / "paced", api_key=KEY)
    context = SimulationContext(paced_engine)
    runner = PacedRunner(context, speedup=3600)  # 6 sim minutes in 0.1 wall seconds
    runner.start()
    deadline = time.monotonic() + 10
    while not paced_engine.finished and time.monotonic() < deadline:
        time.sleep(0.02)
    runner.stop()
    assert paced_engine.finished

    fast_bytes = (tmp_path / "fast" / JOURNAL_FILENAME).read_bytes()
    paced_bytes = (tmp_path / "paced" / JOURNAL_FILENAME).read_bytes()
    assert fast_bytes == paced_bytes


# -- Operator commands ---------------------------------------------------------------


def test_command_round_trip_through_queue():
    scenario = parse_scenario(small_raw())
    engine = SimulationEngine(scenario, api_key=KEY)
    engine.advance_to(0)  # first instant processed
    command_id = engine.submit_motor_command(128, Direction.FORWARD)
    assert engine.command_status(command_id)["status"] == "pending"
    engine.advance_to(1 * MIN)
    status = engine.command_status(command_id)
    assert status["status"] == "acknowledged"
    assert engine.motor_node.state.duty_cycle == pytest.approx(128 / 255)
    assert engine.gateway.lcd.rows[3] == "M:128 FWD       "


def test_command_refused_while_cutoff_active():
    scenario = parse_scenario(small_raw())
    engine = SimulationEngine(scenario, api_key=KEY)
    engine.advance_to(0)
    engine.actuators.power_cutoff = True
    with pytest.raises(PowerCutoffActive):
        engine.submit_motor_command(50, Direction.FORWARD)
    # A command queued before the cutoff is also held back from the radio:
    # it never becomes a gateway transmission and node 4 never moves.
    engine.actuators.power_cutoff = False
    cid = engine.submit_motor_command(50, Direction.FORWARD)
    engine.actuators.power_cutoff = True
    engine.advance_to(2 * MIN)
    assert engine.command_status(cid)["status"] == "refused_power_cutoff"
    assert engine.gateway.command_by_id(cid) is None
    assert engine.motor_node.state.speed_pwm == 0


def test_queued_command_survives_until_processed():
    scenario = parse_scenario(small_raw())
    engine = SimulationEngine(scenario, api_key=KEY)
    cid = engine.submit_motor_command(10, Direction.REVERSE)
    journal = engine.command_journal()
    assert journal and journal[-1]["command_id"] == cid

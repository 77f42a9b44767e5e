"""The serialized simulation context: event loop, command queue, pacing.

All mutation of medium, nodes, gateway, store, and alarms happens inside
one SimulationEngine, driven either to completion in one call (fast mode)
or in wall-clock-paced slices by a PacedRunner thread.  External callers -
the HTTP service, the CLI - interact only by submitting commands into the
queue and reading snapshots under the context lock, so a paced run with no
external input produces exactly the same journal as a fast run.

Within one sample instant the engine serializes channel access: each
node transmits as soon as the previous transmission's window has been
stepped past, mirroring the polling order of the real star topology.
Readings keep the grid time they were sampled at; sub-instant exchanges
(motor commands and their status replies) are stamped with the staggered
microsecond cursor.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .alarms import (
    ACTION_MOTOR_STOP,
    ACTION_POWER_CUTOFF,
    ACTION_SPRINKLER_ON,
    ActionOutcome,
    ActuatorState,
    AlarmEngine,
    AlarmEvent,
)
from .frames import Direction, LinkFrame, RECEIVER
from .gateway import (
    CommandStatus,
    Gateway,
    MissingApiKey,
    UplinkUnreachable,
)
from .ingest import IngestStore, LoopbackTransport
from .medium import RETRY_DELAY_US, DeliveryReport, RadioMedium
from .nodes import DhtNode, FlameNode, MotorNode, SoilNode
from .profile import DhtNoise
from .scenario import GATEWAY, Scenario
from .telemetry import TelemetryRecord, TelemetryStore

JOURNAL_FILENAME = "journal.ndjson"
SUMMARY_FILENAME = "summary.json"

PACE_SLICE_WALL_S = 0.02


class EngineError(Exception):
    pass


class PowerCutoffActive(EngineError):
    """Motor commands are refused while the power-cutoff actuator is set."""


@dataclass
class QueuedCommand:
    command_id: int
    speed: int
    direction: Direction
    origin: str


class SimulationEngine:
    """Owns every mutable piece of one running scenario."""

    def __init__(
        self,
        scenario: Scenario,
        out_dir: Path | str | None = None,
        api_key: str = "",
        uplink_transport=None,
        uplink_url: str = "",
    ):
        self.scenario = scenario
        self.out_dir = Path(out_dir) if out_dir is not None else None
        journal_path = self.out_dir / JOURNAL_FILENAME if self.out_dir else None

        self.medium = RadioMedium(loss=scenario.loss)
        self.store = TelemetryStore(scenario.start_dt, journal_path)
        self.ingest = IngestStore(api_key=api_key)

        radios = {
            entity: self.medium.register(config)
            for entity, config in scenario.radios.items()
        }
        gateway_address = radios[GATEWAY].address
        if scenario.uplink_enabled and uplink_transport is None:
            uplink_transport = LoopbackTransport(
                self.ingest, lambda: self.store.wall_time(self.now_us).isoformat()
            )
        if scenario.uplink_enabled and not api_key:
            raise MissingApiKey("uplink is enabled but no api_key is configured")

        self.gateway = Gateway(
            radio=radios[GATEWAY],
            store=self.store,
            sample_interval_us=scenario.profile.sample_interval_us,
            motor_address=radios["node4"].address,
            uplink_transport=uplink_transport if scenario.uplink_enabled else None,
            uplink_url=uplink_url,
            api_key=api_key,
        )
        self.gateway.radio.set_role(RECEIVER)

        profile = scenario.profile
        self.flame_node = FlameNode(radios["node1"], gateway_address, profile)
        self.soil_node = SoilNode(radios["node2"], gateway_address, profile)
        self.dht_node = DhtNode(
            radios["node3"], gateway_address, profile, DhtNoise(scenario.seed, "node3")
        )
        self.motor_node = MotorNode(radios["node4"], gateway_address)
        self.motor_node.radio.set_role(RECEIVER)
        self._nodes_by_address = {
            radios["node4"].address: self.motor_node,
        }

        self.alarms = AlarmEngine(list(scenario.alarm_rules))
        self.actuators = ActuatorState()

        self._instants = profile.sample_instants()
        self._next_instant_idx = 0
        self._cursor_us = 0
        self._queued: list[QueuedCommand] = []
        self._queued_status: dict[int, str] = {}
        self._next_command_id = 1
        self.finished = False

    # -- Time -----------------------------------------------------------------

    @property
    def now_us(self) -> int:
        return self._cursor_us

    def remaining_instants(self) -> int:
        return len(self._instants) - self._next_instant_idx

    # -- Command intake (any thread, under the context lock) -------------------

    def submit_motor_command(
        self, speed: int, direction: Direction, origin: str = "api"
    ) -> int:
        """Queue a motor command; it reaches the radio on the next advance.

        Raises PowerCutoffActive while the safety interlock is set.
        """
        if self.actuators.power_cutoff:
            raise PowerCutoffActive("power cutoff active; motor commands refused")
        command_id = self._next_command_id
        self._next_command_id += 1
        self._queued.append(
            QueuedCommand(command_id, speed, direction, origin)
        )
        self._queued_status[command_id] = CommandStatus.PENDING.value
        return command_id

    def command_status(self, command_id: int) -> dict | None:
        entry = self.gateway.command_by_id(command_id)
        if entry is not None:
            return entry.as_dict()
        status = self._queued_status.get(command_id)
        if status is None:
            return None
        return {"command_id": command_id, "status": status}

    def command_journal(self) -> list[dict]:
        seen = {e.command_id for e in self.gateway.commands}
        out = [e.as_dict() for e in self.gateway.commands]
        for cmd in self._queued:
            if cmd.command_id not in seen:
                out.append(
                    {
                        "command_id": cmd.command_id,
                        "speed": cmd.speed,
                        "direction": cmd.direction.name.lower(),
                        "origin": cmd.origin,
                        "status": CommandStatus.PENDING.value,
                    }
                )
        out.sort(key=lambda e: e["command_id"])
        return out

    # -- Event processing -------------------------------------------------------

    def _tx_end(self, start_us: int, report: DeliveryReport) -> int:
        return start_us + report.airtime_us_total + (report.attempts - 1) * RETRY_DELAY_US

    def _route_deliveries(
        self, deliveries: dict[bytes, list[LinkFrame]], stamp_t_us: int, cursor_us: int
    ) -> int:
        """Hand delivered frames to their owners; returns the advanced cursor."""
        for address, frames in deliveries.items():
            for frame in frames:
                if address == self.gateway.radio.address:
                    record = self.gateway.on_frame(frame, stamp_t_us)
                    if record is not None:
                        cursor_us = self._evaluate_alarms(record, cursor_us)
                elif address in self._nodes_by_address:
                    node = self._nodes_by_address[address]
                    report = node.handle_frame(self.medium, frame, cursor_us)
                    if report is not None:
                        cursor_us = self._tx_end(cursor_us, report)
                        replies = self.medium.step(cursor_us)
                        cursor_us = self._route_deliveries(replies, cursor_us, cursor_us)
        return cursor_us

    def _evaluate_alarms(self, record: TelemetryRecord, cursor_us: int) -> int:
        for event in self.alarms.evaluate(record):
            cursor_us = self._execute_alarm(event, cursor_us)
        return cursor_us

    def _execute_alarm(self, event: AlarmEvent, cursor_us: int) -> int:
        rule = self.alarms.get_rule(event.rule_id)
        for action in rule.actions:
            if action == ACTION_MOTOR_STOP:
                cursor_us, outcome = self._motor_stop(event, cursor_us)
            elif action == ACTION_SPRINKLER_ON:
                self.actuators.sprinkler_on = True
                outcome = "on"
            elif action == ACTION_POWER_CUTOFF:
                self.actuators.power_cutoff = True
                outcome = "on"
            else:
                outcome = "unknown_action"
            event.actions.append(ActionOutcome(action=action, outcome=outcome))
        self.store.append(
            event.t_us,
            event.node,
            "alarm",
            {
                "rule_id": event.rule_id,
                "field": event.field,
                "value": event.value,
                "actions": ";".join(f"{a.action}={a.outcome}" for a in event.actions),
            },
        )
        return cursor_us

    def _motor_stop(self, event: AlarmEvent, cursor_us: int) -> tuple[int, str]:
        if self.actuators.power_cutoff:
            return cursor_us, "blocked_power_cutoff"
        command_id = self._next_command_id
        self._next_command_id += 1
        entry, report = self.gateway.send_motor_command(
            self.medium,
            0,
            Direction.STOP,
            cursor_us,
            origin=f"alarm:{event.rule_id}",
            command_id=command_id,
        )
        cursor_us = self._tx_end(cursor_us, report)
        deliveries = self.medium.step(cursor_us)
        cursor_us = self._route_deliveries(deliveries, cursor_us, cursor_us)
        return cursor_us, entry.status.value

    def _process_instant(self, t_us: int) -> None:
        cursor = max(self._cursor_us, t_us)
        for node in (self.flame_node, self.soil_node, self.dht_node):
            report = node.tick(self.medium, t_us, tx_at_us=cursor)
            if report is None:
                continue
            cursor = self._tx_end(cursor, report)
            deliveries = self.medium.step(cursor)
            cursor = self._route_deliveries(deliveries, t_us, cursor)
        if self.gateway.uplink_transport is not None:
            try:
                self.gateway.uplink_latest(t_us)
            except UplinkUnreachable:
                pass  # journaled by the gateway; a run survives a dead uplink
        self._cursor_us = cursor

    def _process_queued_commands(self, now_us: int) -> None:
        queued, self._queued = self._queued, []
        for cmd in queued:
            if self.actuators.power_cutoff:
                self._queued_status[cmd.command_id] = "refused_power_cutoff"
                self.store.append(
                    max(now_us, self._cursor_us),
                    "node4",
                    "command",
                    {
                        "command_id": cmd.command_id,
                        "speed": cmd.speed,
                        "direction": cmd.direction.name.lower(),
                        "origin": cmd.origin,
                        "status": "refused_power_cutoff",
                    },
                )
                continue
            cursor = max(now_us, self._cursor_us)
            entry, report = self.gateway.send_motor_command(
                self.medium,
                cmd.speed,
                cmd.direction,
                cursor,
                origin=cmd.origin,
                command_id=cmd.command_id,
            )
            cursor = self._tx_end(cursor, report)
            deliveries = self.medium.step(cursor)
            cursor = self._route_deliveries(deliveries, cursor, cursor)
            self._cursor_us = cursor
            self._queued_status.pop(cmd.command_id, None)

    def advance_to(self, t_us: int) -> None:
        """Process everything due at or before simulated time t_us."""
        if self.finished:
            return
        while (
            self._next_instant_idx < len(self._instants)
            and self._instants[self._next_instant_idx] <= t_us
        ):
            instant = self._instants[self._next_instant_idx]
            self._next_instant_idx += 1
            self._process_instant(instant)
        self._process_queued_commands(t_us)
        self._cursor_us = max(self._cursor_us, t_us)
        if (
            self._next_instant_idx >= len(self._instants)
            and t_us >= self.scenario.profile.run_end_us
        ):
            self.finish()

    def run_fast(self) -> dict:
        """Run the whole window without wall-clock pacing; returns the summary."""
        self.advance_to(self.scenario.profile.run_end_us)
        return self.summary()

    def finish(self) -> None:
        if self.finished:
            return
        self.finished = True
        self.store.close()
        if self.out_dir is not None:
            summary_path = self.out_dir / SUMMARY_FILENAME
            summary_path.write_text(
                json.dumps(self.summary(), sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )

    # -- Reporting --------------------------------------------------------------

    def reading_counts(self) -> dict[str, int]:
        counts = {n: 0 for n in ("node1", "node2", "node3", "node4")}
        for record in self.store.records():
            if record.kind in ("flame", "soil", "dht", "motor"):
                counts[record.node] = counts.get(record.node, 0) + 1
        return counts

    def summary(self) -> dict:
        medium_stats = self.medium.stats
        failure_rate = (
            medium_stats.failed / medium_stats.transmissions
            if medium_stats.transmissions
            else 0.0
        )
        return {
            "scenario": self.scenario.name,
            "seed": self.scenario.seed,
            "sim_start": self.scenario.start_dt.isoformat(),
            "sim_end": self.scenario.end_dt.isoformat(),
            "sample_instants": len(self._instants),
            "readings_per_node": self.reading_counts(),
            "records_total": len(self.store),
            "medium": medium_stats.as_dict(),
            "delivery_failure_rate": failure_rate,
            "gateway": self.gateway.counters.as_dict(),
            "alarm_events": [e.as_dict() for e in self.alarms.events],
            "actuators": self.actuators.as_dict(),
            "uplink_entries": len(self.ingest.entries),
        }

    # -- Snapshots for the API ----------------------------------------------------

    def latest_snapshot(self) -> dict:
        now = self.now_us
        interval = self.scenario.profile.sample_interval_us
        nodes = {}
        for node_id in ("node1", "node2", "node3", "node4"):
            entry = self.gateway.table.get(node_id)
            stale = self.gateway.table.is_stale(node_id, now, interval)
            if entry is None:
                nodes[node_id] = {"kind": None, "values": None, "received_iso": None, "stale": True}
            else:
                nodes[node_id] = {
                    "kind": entry.kind,
                    "values": dict(entry.values),
                    "received_iso": self.store.wall_time(entry.received_t_us).isoformat(),
                    "stale": stale,
                }
        motor = self.motor_node.state
        return {
            "time": {
                "t_us": now,
                "iso": self.store.wall_time(now).isoformat(),
                "date": self.store.wall_time(now).strftime("%d-%m-%Y"),
                "clock": self.store.wall_time(now).strftime("%H:%M"),
            },
            "nodes": nodes,
            "motor": {
                "speed": motor.speed_pwm,
                "direction": motor.direction.name.lower(),
                "duty_cycle": motor.duty_cycle,
                "in3": motor.in3,
                "in4": motor.in4,
            },
            "actuators": self.actuators.as_dict(),
            "lcd": list(self.gateway.lcd.rows),
            "counters": {
                **self.gateway.counters.as_dict(),
                "medium": self.medium.stats.as_dict(),
            },
            "alarm_events": [e.as_dict() for e in self.alarms.events],
            "finished": self.finished,
        }


class SimulationContext:
    """Thread-safe facade shared by the engine driver and the HTTP service."""

    def __init__(self, engine: SimulationEngine):
        self.engine = engine
        self.lock = threading.RLock()

    def submit_motor_command(self, speed: int, direction: Direction, origin: str = "api") -> int:
        with self.lock:
            return self.engine.submit_motor_command(speed, direction, origin)

    def snapshot(self) -> dict:
        with self.lock:
            return self.engine.latest_snapshot()


class PacedRunner:
    """Advances a context in wall-clock slices: sim time = wall time x speedup.

    This class is the only place the simulation touches the wall clock;
    pacing changes nothing about the journal a scenario produces.
    """

    def __init__(self, context: SimulationContext, speedup: float = 1.0):
        if speedup <= 0:
            raise EngineError("speedup must be positive")
        self.context = context
        self.speedup = speedup
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="wsn-twin-paced", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        engine = self.context.engine
        wall_start = time.monotonic()
        end_us = engine.scenario.profile.run_end_us
        while not self._stop.is_set():
            elapsed_wall = time.monotonic() - wall_start
            target_us = min(int(elapsed_wall * self.speedup * 1_000_000), end_us)
            with self.context.lock:
                engine.advance_to(target_us)
                if engine.finished:
                    break
            time.sleep(PACE_SLICE_WALL_S)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

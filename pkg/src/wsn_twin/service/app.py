"""HTTP control surface: readings, motor control, alarm rules, local ingest.

The service is a thin shell over a SimulationContext.  Reads serve
snapshots taken under the context lock; writes are queued into the
serialized simulation, so no request ever blocks on radio delivery.
Request validation failures surface as 400 (not FastAPI's default 422) to
keep the error contract plain.
"""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..alarms import AlarmRule, InvalidRule
from ..config import ServiceConfig
from ..engine import PowerCutoffActive, SimulationContext
from ..frames import Direction
from ..telemetry import InvertedRange
from .schemas import (
    ActuatorClearResponse,
    AlarmRuleModel,
    AlarmRuleOut,
    CommandJournalEntry,
    HistoryEntry,
    LatestResponse,
    MotorCommandAccepted,
    MotorCommandRequest,
)

KNOWN_NODES = ("node1", "node2", "node3", "node4")

_DIRECTIONS = {
    "forward": Direction.FORWARD,
    "reverse": Direction.REVERSE,
    "stop": Direction.STOP,
}


def create_app(
    context: SimulationContext,
    config: ServiceConfig,
    frontend_dir: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="wsn-twin control api", version="0.1.0")
    engine = context.engine

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/api/readings/latest", response_model=LatestResponse)
    def readings_latest():
        return context.snapshot()

    @app.get("/api/readings", response_model=list[HistoryEntry])
    def readings_history(
        node: str | None = None,
        from_: str | None = Query(default=None, alias="from"),
        to: str | None = Query(default=None, alias="to"),
    ):
        if node is not None and node not in KNOWN_NODES:
            return JSONResponse(status_code=404, content={"detail": f"unknown node {node!r}"})
        try:
            from_us = _parse_iso(from_) if from_ else None
            to_us = _parse_iso(to) if to else None
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        with context.lock:
            try:
                records = engine.store.query_range(node=node, from_us=from_us, to_us=to_us)
            except InvertedRange as exc:
                return JSONResponse(status_code=400, content={"detail": str(exc)})
            return [r.as_dict() for r in records]

    def _parse_iso(text: str) -> int:
        try:
            moment = datetime.fromisoformat(text)
        except ValueError:
            raise ValueError(f"not an ISO-8601 timestamp: {text!r}")
        return engine.store.to_t_us(moment)

    @app.post("/api/motor", response_model=MotorCommandAccepted, status_code=202)
    def motor_command(body: MotorCommandRequest):
        try:
            command_id = context.submit_motor_command(
                body.speed, _DIRECTIONS[body.direction], origin="api"
            )
        except PowerCutoffActive as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        return MotorCommandAccepted(command_id=command_id, status="pending")

    @app.get("/api/commands", response_model=list[CommandJournalEntry])
    def commands():
        with context.lock:
            return engine.command_journal()

    @app.get("/api/commands/{command_id}", response_model=CommandJournalEntry)
    def command_detail(command_id: int):
        with context.lock:
            entry = engine.command_status(command_id)
        if entry is None:
            return JSONResponse(status_code=404, content={"detail": f"no command {command_id}"})
        return entry

    @app.get("/api/alarms", response_model=list[AlarmRuleOut])
    def alarms_list():
        with context.lock:
            return [r.as_dict() for r in engine.alarms.rules()]

    @app.put("/api/alarms/{rule_id}", response_model=AlarmRuleOut)
    def alarms_put(rule_id: str, body: AlarmRuleModel):
        try:
            rule = AlarmRule(
                rule_id=rule_id,
                node=body.node,
                field=body.field,
                comparator=body.comparator,
                threshold=body.threshold,
                debounce=body.debounce,
                actions=tuple(body.actions),
                armed=body.armed,
            )
        except InvalidRule as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        with context.lock:
            engine.alarms.put_rule(rule)
            return rule.as_dict()

    @app.get("/api/alarms/events", response_model=list[dict])
    def alarm_events():
        with context.lock:
            return [e.as_dict() for e in engine.alarms.events]

    @app.post("/api/alarms/clear", response_model=ActuatorClearResponse)
    def alarms_clear():
        """Operator reset of the fire-response actuators (sprinkler + cutoff)."""
        with context.lock:
            engine.actuators.sprinkler_on = False
            engine.actuators.power_cutoff = False
            return {"actuators": engine.actuators.as_dict()}

    @app.get("/update", response_class=PlainTextResponse)
    def ingest_update(request: Request, api_key: str = ""):
        """ThingSpeak-compatible channel update; body is the entry id, or 0."""
        params = dict(request.query_params)
        params.pop("api_key", None)
        with context.lock:
            created_at = engine.store.wall_time(engine.now_us).isoformat()
            entry_id = engine.ingest.ingest(api_key, params, created_at)
        return PlainTextResponse(str(entry_id))

    @app.get("/api/ingest/feeds", response_model=list[dict])
    def ingest_feeds():
        with context.lock:
            return engine.ingest.feeds()

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app

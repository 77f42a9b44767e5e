"""Pydantic request/response models for the control API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

NodeId = Literal["node1", "node2", "node3", "node4"]
DirectionName = Literal["forward", "reverse", "stop"]
ComparatorName = Literal[">", ">=", "<", "<=", "==", "!="]
ActionName = Literal["motor_stop", "sprinkler_on", "power_cutoff_flag"]


class MotorCommandRequest(BaseModel):
    speed: int = Field(ge=0, le=255)
    direction: DirectionName


class MotorCommandAccepted(BaseModel):
    command_id: int
    status: str


class CommandJournalEntry(BaseModel):
    command_id: int
    speed: int | None = None
    direction: str | None = None
    origin: str | None = None
    issued_t_us: int | None = None
    status: str
    resolved_t_us: int | None = None


class MotorStateModel(BaseModel):
    speed: int
    direction: str
    duty_cycle: float
    in3: int
    in4: int


class NodeReadingModel(BaseModel):
    kind: str | None
    values: dict | None
    received_iso: str | None
    stale: bool


class ActuatorsModel(BaseModel):
    sprinkler_on: bool
    power_cutoff: bool


class TimeModel(BaseModel):
    t_us: int
    iso: str
    date: str
    clock: str


class LatestResponse(BaseModel):
    time: TimeModel
    nodes: dict[str, NodeReadingModel]
    motor: MotorStateModel
    actuators: ActuatorsModel
    lcd: list[str]
    counters: dict
    alarm_events: list[dict]
    finished: bool


class HistoryEntry(BaseModel):
    id: int
    t_us: int
    iso: str
    date: str
    clock: str
    node: str
    kind: str
    values: dict
    source: str


class AlarmRuleModel(BaseModel):
    node: NodeId
    field: str = Field(min_length=1)
    comparator: ComparatorName
    threshold: float
    debounce: int = Field(default=1, ge=1)
    actions: list[ActionName] = Field(min_length=1)
    armed: bool = True


class AlarmRuleOut(AlarmRuleModel):
    id: str


class ActuatorClearResponse(BaseModel):
    actuators: ActuatorsModel


class ErrorResponse(BaseModel):
    detail: str

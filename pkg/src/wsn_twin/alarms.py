"""Edge-triggered alarm rules driving the automated fire response.

A rule watches one field of one node's readings.  Its condition must hold
for `debounce` consecutive samples before the rule arms its edge; the rule
then fires exactly once and stays latched until the condition drops, so a
sustained fire produces one event, not an action storm.  Actions run in
their listed order - stopping the motor must precede the power cutoff,
otherwise the stop command itself would be refused.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field

from .telemetry import TelemetryRecord

ACTION_MOTOR_STOP = "motor_stop"
ACTION_SPRINKLER_ON = "sprinkler_on"
ACTION_POWER_CUTOFF = "power_cutoff_flag"

KNOWN_ACTIONS = (ACTION_MOTOR_STOP, ACTION_SPRINKLER_ON, ACTION_POWER_CUTOFF)

COMPARATORS = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
    "!=": operator.ne,
}

KNOWN_NODES = ("node1", "node2", "node3", "node4")


class InvalidRule(ValueError):
    pass


@dataclass(frozen=True)
class AlarmRule:
    rule_id: str
    node: str
    field: str
    comparator: str
    threshold: float
    debounce: int = 1
    actions: tuple[str, ...] = (ACTION_MOTOR_STOP, ACTION_SPRINKLER_ON, ACTION_POWER_CUTOFF)
    armed: bool = True

    def __post_init__(self) -> None:
        problems = []
        if not self.rule_id:
            problems.append("rule id must be non-empty")
        if self.node not in KNOWN_NODES:
            problems.append(f"unknown node {self.node!r}")
        if self.comparator not in COMPARATORS:
            problems.append(f"unknown comparator {self.comparator!r}")
        if self.debounce < 1:
            problems.append(f"debounce must be >= 1, got {self.debounce}")
        if not self.actions:
            problems.append("actions must be non-empty")
        for action in self.actions:
            if action not in KNOWN_ACTIONS:
                problems.append(f"unknown action {action!r}")
        if problems:
            raise InvalidRule("; ".join(problems))

    def condition(self, value: float) -> bool:
        return COMPARATORS[self.comparator](value, self.threshold)

    def as_dict(self) -> dict:
        return {
            "id": self.rule_id,
            "node": self.node,
            "field": self.field,
            "comparator": self.comparator,
            "threshold": self.threshold,
            "debounce": self.debounce,
            "actions": list(self.actions),
            "armed": self.armed,
        }


def default_fire_rule() -> AlarmRule:
    """Any nonzero flame ADC means fire: stop the motor, open the sprinkler,
    cut the power."""
    return AlarmRule(
        rule_id="fire-default",
        node="node1",
        field="adc",
        comparator=">",
        threshold=0,
        debounce=1,
        actions=(ACTION_MOTOR_STOP, ACTION_SPRINKLER_ON, ACTION_POWER_CUTOFF),
        armed=True,
    )


@dataclass
class ActionOutcome:
    action: str
    outcome: str

    def as_dict(self) -> dict:
        return {"action": self.action, "outcome": self.outcome}


@dataclass
class AlarmEvent:
    rule_id: str
    t_us: int
    node: str
    field: str
    value: float
    actions: list[ActionOutcome] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "t_us": self.t_us,
            "node": self.node,
            "field": self.field,
            "value": self.value,
            "actions": [a.as_dict() for a in self.actions],
        }


@dataclass
class ActuatorState:
    """Boolean actuators set by alarm actions; cleared manually by the operator."""

    sprinkler_on: bool = False
    power_cutoff: bool = False

    def as_dict(self) -> dict:
        return {"sprinkler_on": self.sprinkler_on, "power_cutoff": self.power_cutoff}


class AlarmEngine:
    """Evaluates rules against the reading stream, one record at a time."""

    def __init__(self, rules: list[AlarmRule] | None = None):
        self._rules: dict[str, AlarmRule] = {}
        self._streak: dict[str, int] = {}
        self._active: dict[str, bool] = {}
        self.events: list[AlarmEvent] = []
        for rule in rules or []:
            self.put_rule(rule)

    def rules(self) -> list[AlarmRule]:
        return list(self._rules.values())

    def get_rule(self, rule_id: str) -> AlarmRule | None:
        return self._rules.get(rule_id)

    def put_rule(self, rule: AlarmRule) -> None:
        """Insert or replace a rule; its debounce/edge state starts fresh."""
        self._rules[rule.rule_id] = rule
        self._streak[rule.rule_id] = 0
        self._active[rule.rule_id] = False

    def evaluate(self, record: TelemetryRecord) -> list[AlarmEvent]:
        """Advance every matching rule's debounce state; returns the events
        fired by this record (risings edges only).

        Action execution is the caller's job: each returned event still has
        an empty outcome list.
        """
        fired: list[AlarmEvent] = []
        for rule in self._rules.values():
            if rule.node != record.node or rule.field not in record.values:
                continue
            if not rule.armed:
                self._streak[rule.rule_id] = 0
                self._active[rule.rule_id] = False
                continue
            value = record.values[rule.field]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                continue
            if rule.condition(value):
                self._streak[rule.rule_id] += 1
            else:
                self._streak[rule.rule_id] = 0
            debounced = self._streak[rule.rule_id] >= rule.debounce
            rising = debounced and not self._active[rule.rule_id]
            self._active[rule.rule_id] = debounced
            if rising:
                fired.append(
                    AlarmEvent(
                        rule_id=rule.rule_id,
                        t_us=record.t_us,
                        node=record.node,
                        field=rule.field,
                        value=value,
                    )
                )
        self.events.extend(fired)
        return fired

"""Scenario files: parsing, validation, defaults, and the bundled reference day.

A scenario is a JSON document (schema: data/scenario.schema.json) that
fixes everything a run needs: the clock window, per-radio parameters, the
environment profile, the loss model, alarm rules, and the mandatory RNG
seed.  Loading fills every omitted field with its documented default and
returns both the resolved runtime objects and an echo dict showing the
complete effective configuration.

The bundled "paper-day" scenario re-creates the reference deployment
recording: a gateway console row of 33 C / 70 % / soil ADC 293 at 10:28,
a flame interval from 12:00 to 12:30, soil moisture bottoming out at
13:00, and a 30-minute sample grid from 10:30 to 14:30.  Curve points
between those anchors are interpolation choices, not measurements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from importlib import resources
from pathlib import Path

import jsonschema

from .alarms import AlarmRule, InvalidRule, default_fire_rule
from .frames import RECEIVER, TRANSMITTER
from .medium import LossModel, RadioConfig
from .profile import (
    ADC_MAX,
    Curve,
    FlameWindow,
    ScenarioProfile,
    US_PER_MINUTE,
)

GATEWAY = "gateway"
SENSOR_NODES = ("node1", "node2", "node3")
ALL_NODES = ("node1", "node2", "node3", "node4")
RADIO_ENTITIES = (GATEWAY,) + ALL_NODES

DEFAULT_ADDRESSES = {
    GATEWAY: b"GATEW",
    "node1": b"NODE1",
    "node2": b"NODE2",
    "node3": b"NODE3",
    "node4": b"NODE4",
}

DEFAULT_RADIO_PARAMS = {
    "channel": 76,
    "data_rate_bps": 1_000_000,
    "max_retries": 15,
    "tx_current_ma": 12,
}

# Gateway console row the bundled scenario is anchored to.
REFERENCE_SPOT = {
    "date": "09-07-2020",
    "clock": "10:28",
    "temp_c": 33,
    "humidity_pct": 70,
    "soil_adc": 293,
}

PAPER_SCENARIO_NAME = "paper-day"


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    pass


class SchemaViolation(ScenarioError):
    """Carries every validation failure found, not just the first."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _load_schema() -> dict:
    text = resources.files("wsn_twin.data").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


_SCHEMA = _load_schema()


def parse_clock(text: str) -> int:
    """'HH:MM' to microseconds since midnight."""
    hours, minutes = text.split(":")
    h, m = int(hours), int(minutes)
    if not (0 <= h <= 23 and 0 <= m <= 59):
        raise ValueError(f"invalid clock time {text!r}")
    return (h * 60 + m) * US_PER_MINUTE


def format_clock(clock_us: int) -> str:
    minutes = clock_us // US_PER_MINUTE
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_address(value) -> bytes:
    if isinstance(value, str):
        return value.encode("ascii")
    return bytes(value)


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario ready to run."""

    name: str
    date_display: str
    start_dt: datetime
    start_clock_us: int
    duration_us: int
    seed: int
    loss: LossModel
    radios: dict[str, RadioConfig]
    profile: ScenarioProfile
    alarm_rules: tuple[AlarmRule, ...]
    uplink_enabled: bool
    echo: dict

    @property
    def end_dt(self) -> datetime:
        return self.start_dt + timedelta(microseconds=self.duration_us)

    def clock_to_t_us(self, text: str) -> int:
        """'HH:MM' on the scenario date to simulation microseconds."""
        return parse_clock(text) - self.start_clock_us


def _resolve_defaults(raw: dict) -> dict:
    """Produce the effective configuration with every default filled in."""
    eff = {
        "name": raw["name"],
        "date": raw.get("date", "01-01-2020"),
        "run_window": dict(raw.get("run_window", {"start": "10:30", "end": "14:30"})),
        "sample_interval_min": raw.get("sample_interval_min", 30),
        "seed": raw["seed"],
        "loss": {"probability": raw.get("loss", {}).get("probability", 0.0)},
        "radio_defaults": {**DEFAULT_RADIO_PARAMS, **raw.get("radio_defaults", {})},
        "radios": {},
        "profile": {
            "flame_windows": [],
            "soil_curve": [],
            "temp_curve": [],
            "humidity_curve": [],
        },
        "alarms": [],
        "uplink": {"enabled": raw.get("uplink", {}).get("enabled", True)},
    }
    raw_radios = raw.get("radios", {})
    for entity in RADIO_ENTITIES:
        entry = dict(raw_radios.get(entity, {}))
        entry.setdefault("address", DEFAULT_ADDRESSES[entity].decode("ascii"))
        for key, value in eff["radio_defaults"].items():
            entry.setdefault(key, value)
        eff["radios"][entity] = entry

    window = eff["run_window"]
    raw_profile = raw.get("profile", {})
    eff["profile"]["flame_windows"] = [
        {"start": w["start"], "end": w["end"], "peak_adc": w.get("peak_adc", 1023)}
        for w in raw_profile.get("flame_windows", [])
    ]
    for curve_name, fallback in (
        ("soil_curve", 512.0),
        ("temp_curve", 25.0),
        ("humidity_curve", 50.0),
    ):
        points = raw_profile.get(curve_name)
        if not points:
            points = [[window["start"], fallback]]
        eff["profile"][curve_name] = [[t, v] for t, v in points]

    if "alarms" in raw:
        eff["alarms"] = [dict(rule) for rule in raw["alarms"]]
        for rule in eff["alarms"]:
            rule.setdefault("debounce", 1)
            rule.setdefault("actions", ["motor_stop", "sprinkler_on", "power_cutoff_flag"])
            rule.setdefault("armed", True)
    else:
        eff["alarms"] = [default_fire_rule().as_dict()]
    return eff


def parse_scenario(raw: dict, source: str = "<dict>") -> Scenario:
    """Validate a raw scenario document and resolve it for running.

    Raises SchemaViolation listing every structural and semantic problem
    found.
    """
    validator = jsonschema.Draft202012Validator(_SCHEMA)
    problems = [
        f"{'/'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
        for err in sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    ]
    if problems:
        raise SchemaViolation(problems)

    eff = _resolve_defaults(raw)
    problems = []

    try:
        start_dt_date = datetime.strptime(eff["date"], "%d-%m-%Y")
    except ValueError:
        problems.append(f"date: {eff['date']!r} is not a valid DD-MM-YYYY date")
        start_dt_date = datetime(2020, 1, 1)

    start_clock_us = parse_clock(eff["run_window"]["start"])
    end_clock_us = parse_clock(eff["run_window"]["end"])
    if start_clock_us >= end_clock_us:
        problems.append("run_window: start must be before end")
    duration_us = max(end_clock_us - start_clock_us, 1)

    def to_t(text: str, what: str) -> int:
        t = parse_clock(text) - start_clock_us
        if not 0 <= t <= duration_us:
            problems.append(f"{what}: {text} lies outside the run window")
        return t

    flame_windows = []
    for i, w in enumerate(eff["profile"]["flame_windows"]):
        start = parse_clock(w["start"]) - start_clock_us
        end = parse_clock(w["end"]) - start_clock_us
        if start >= end:
            problems.append(f"profile/flame_windows/{i}: start must be before end")
            continue
        flame_windows.append(FlameWindow(start_us=start, end_us=end, peak_adc=w["peak_adc"]))

    def to_curve(name: str) -> Curve:
        points = []
        for i, (t_text, value) in enumerate(eff["profile"][name]):
            points.append((to_t(t_text, f"profile/{name}/{i}"), float(value)))
        if [t for t, _ in points] != sorted(t for t, _ in points):
            problems.append(f"profile/{name}: points must be time-sorted")
        if name == "soil_curve":
            for (t, v) in points:
                if not 0 <= v <= ADC_MAX:
                    problems.append(f"profile/{name}: value {v} outside 0..{ADC_MAX}")
        return tuple(points)

    soil_curve = to_curve("soil_curve")
    temp_curve = to_curve("temp_curve")
    humidity_curve = to_curve("humidity_curve")

    radios: dict[str, RadioConfig] = {}
    seen_addresses: dict[bytes, str] = {}
    for entity in RADIO_ENTITIES:
        entry = eff["radios"][entity]
        address = parse_address(entry["address"])
        if len(address) != 5:
            problems.append(f"radios/{entity}: address must be exactly 5 octets")
            continue
        if address in seen_addresses:
            problems.append(
                f"radios/{entity}: address {entry['address']!r} duplicates "
                f"{seen_addresses[address]}"
            )
        seen_addresses[address] = entity
        role = TRANSMITTER if entity in SENSOR_NODES else RECEIVER
        try:
            radios[entity] = RadioConfig(
                address=address,
                channel=entry["channel"],
                data_rate_bps=entry["data_rate_bps"],
                role=role,
                max_retries=entry["max_retries"],
                tx_current_ma=entry["tx_current_ma"],
            )
        except Exception as exc:
            problems.append(f"radios/{entity}: {exc}")

    alarm_rules = []
    for i, rule_raw in enumerate(eff["alarms"]):
        try:
            alarm_rules.append(
                AlarmRule(
                    rule_id=rule_raw["id"],
                    node=rule_raw["node"],
                    field=rule_raw["field"],
                    comparator=rule_raw["comparator"],
                    threshold=rule_raw["threshold"],
                    debounce=rule_raw["debounce"],
                    actions=tuple(rule_raw["actions"]),
                    armed=rule_raw["armed"],
                )
            )
        except InvalidRule as exc:
            problems.append(f"alarms/{i}: {exc}")

    rule_ids = [r.rule_id for r in alarm_rules]
    if len(rule_ids) != len(set(rule_ids)):
        problems.append("alarms: rule ids must be unique")

    if problems:
        raise SchemaViolation(problems)

    profile = ScenarioProfile(
        run_start_us=0,
        run_end_us=duration_us,
        sample_interval_us=eff["sample_interval_min"] * US_PER_MINUTE,
        clock_offset_us=start_clock_us,
        flame_windows=tuple(flame_windows),
        soil_curve=soil_curve,
        temp_curve=temp_curve,
        humidity_curve=humidity_curve,
    )
    return Scenario(
        name=eff["name"],
        date_display=eff["date"],
        start_dt=start_dt_date + timedelta(microseconds=start_clock_us),
        start_clock_us=start_clock_us,
        duration_us=duration_us,
        seed=eff["seed"],
        loss=LossModel(probability=eff["loss"]["probability"], seed=eff["seed"]),
        radios=radios,
        profile=profile,
        alarm_rules=tuple(alarm_rules),
        uplink_enabled=eff["uplink"]["enabled"],
        echo=eff,
    )


def load_scenario(path: Path | str) -> Scenario:
    """Load, validate, and resolve a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SchemaViolation(["<root>: scenario must be a JSON object"])
    return parse_scenario(raw, source=str(path))


def paper_day_raw() -> dict:
    """The bundled reference-day scenario as a raw document."""
    text = resources.files("wsn_twin.data").joinpath("paper_day.json").read_text()
    return json.loads(text)


def paper_day() -> Scenario:
    return parse_scenario(paper_day_raw(), source="<paper-day>")

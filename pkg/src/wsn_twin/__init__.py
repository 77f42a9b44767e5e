"""wsn-twin: a deterministic digital twin of an NRF24-class industrial WSN."""

from .frames import (
    Direction,
    LinkFrame,
    RECEIVER,
    RadioRole,
    TRANSMITTER,
    crc16,
    decode_frame,
    decode_payload,
    encode_frame,
    encode_payload,
)
from .medium import DeliveryReport, LossModel, RadioConfig, RadioMedium, airtime_us
from .nodes import MotorState, apply_motor_command
from .profile import ScenarioProfile, sample_dht11, sample_flame, sample_soil
from .gateway import Gateway, LatestTable, LcdBuffer, render_lcd
from .telemetry import TelemetryRecord, TelemetryStore
from .alarms import AlarmEngine, AlarmRule, default_fire_rule
from .scenario import Scenario, load_scenario, paper_day
from .engine import PacedRunner, SimulationContext, SimulationEngine

__version__ = "0.1.0"

__all__ = [
    "AlarmEngine",
    "AlarmRule",
    "DeliveryReport",
    "Direction",
    "Gateway",
    "LatestTable",
    "LcdBuffer",
    "LinkFrame",
    "LossModel",
    "MotorState",
    "PacedRunner",
    "RECEIVER",
    "RadioConfig",
    "RadioMedium",
    "RadioRole",
    "Scenario",
    "ScenarioProfile",
    "SimulationContext",
    "SimulationEngine",
    "TRANSMITTER",
    "TelemetryRecord",
    "TelemetryStore",
    "airtime_us",
    "apply_motor_command",
    "crc16",
    "decode_frame",
    "decode_payload",
    "default_fire_rule",
    "encode_frame",
    "encode_payload",
    "load_scenario",
    "paper_day",
    "render_lcd",
    "sample_dht11",
    "sample_flame",
    "sample_soil",
    "__version__",
]

"""Cluster-tree root: frame intake, latest-readings table, LCD, cloud uplink,
and the downlink path for motor commands.

The gateway listens for node frames, keeps the most recent reading per
node, mirrors them onto a 16x4 character LCD, journals everything into the
telemetry store, and forwards the latest values upstream in ThingSpeak
update format.  Operator motor commands go out over the radio to node 4
and are tracked in a command journal until the node's status frame
confirms them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol
from urllib.parse import urlencode

from .frames import (
    Direction,
    DhtPayload,
    FlamePayload,
    FrameError,
    LinkFrame,
    MotorCommand,
    MotorStatus,
    RECEIVER,
    SoilPayload,
    TAG_DHT,
    TAG_FLAME,
    TAG_MOTOR_STATUS,
    TAG_SOIL,
    TRANSMITTER,
    decode_frame,
    decode_payload,
    encode_payload,
)
from .medium import DeliveryReport, Radio, RadioMedium
from .nodes import MotorState, NODE_DHT, NODE_FLAME, NODE_MOTOR, NODE_SOIL
from .telemetry import TelemetryRecord, TelemetryStore

LCD_ROWS = 4
LCD_COLS = 16

# A node with no frame for longer than this many sample intervals is stale.
STALENESS_INTERVALS = 2

DIRECTION_LABELS = {
    Direction.STOP: "STP",
    Direction.FORWARD: "FWD",
    Direction.REVERSE: "REV",
}

_TAG_TO_NODE = {
    TAG_FLAME: NODE_FLAME,
    TAG_SOIL: NODE_SOIL,
    TAG_DHT: NODE_DHT,
    TAG_MOTOR_STATUS: NODE_MOTOR,
}


class GatewayError(Exception):
    pass


class MissingApiKey(GatewayError):
    pass


class UplinkUnreachable(GatewayError):
    pass


class TransportError(Exception):
    """Raised by transports when the endpoint cannot be reached at all."""


class UplinkTransport(Protocol):
    def send(self, url: str) -> tuple[int, str]:
        """Deliver one GET request; returns (status code, body text)."""
        ...


class CommandStatus(str, Enum):
    PENDING = "pending"
    ACKNOWLEDGED = "acknowledged"
    FAILED = "failed"


@dataclass
class CommandEntry:
    command_id: int
    speed: int
    direction: Direction
    origin: str
    issued_t_us: int
    status: CommandStatus = CommandStatus.PENDING
    resolved_t_us: int | None = None

    def as_dict(self) -> dict:
        return {
            "command_id": self.command_id,
            "speed": self.speed,
            "direction": self.direction.name.lower(),
            "origin": self.origin,
            "issued_t_us": self.issued_t_us,
            "status": self.status.value,
            "resolved_t_us": self.resolved_t_us,
        }


@dataclass
class TableEntry:
    node: str
    kind: str
    values: dict
    received_t_us: int
    seq: int


class LatestTable:
    """Most recent reading per node; receive timestamps never move backwards."""

    def __init__(self) -> None:
        self._entries: dict[str, TableEntry] = {}

    def get(self, node: str) -> TableEntry | None:
        return self._entries.get(node)

    def update(self, node: str, kind: str, values: dict, t_us: int, seq: int) -> None:
        current = self._entries.get(node)
        if current is not None and t_us < current.received_t_us:
            raise GatewayError(
                f"table timestamp for {node} would regress: {t_us} < {current.received_t_us}"
            )
        self._entries[node] = TableEntry(node, kind, dict(values), t_us, seq)

    def is_stale(self, node: str, now_us: int, sample_interval_us: int) -> bool:
        entry = self._entries.get(node)
        if entry is None:
            return True
        return now_us - entry.received_t_us > STALENESS_INTERVALS * sample_interval_us

    def items(self) -> dict[str, TableEntry]:
        return dict(self._entries)


@dataclass(frozen=True)
class LcdBuffer:
    rows: tuple[str, str, str, str]

    def __post_init__(self) -> None:
        if len(self.rows) != LCD_ROWS:
            raise GatewayError(f"LCD has exactly {LCD_ROWS} rows")
        for row in self.rows:
            if len(row) != LCD_COLS:
                raise GatewayError(f"LCD rows are exactly {LCD_COLS} chars: {row!r}")
            if not all(0x20 <= ord(ch) <= 0x7E for ch in row):
                raise GatewayError(f"LCD rows must be printable 7-bit text: {row!r}")


def render_lcd(table: LatestTable, motor: MotorState) -> LcdBuffer:
    """Render the four fixed display rows; missing readings show dashes."""
    dht = table.get(NODE_DHT)
    soil = table.get(NODE_SOIL)
    flame = table.get(NODE_FLAME)

    temp = dht.values["temp_c"] if dht else "---"
    hum = dht.values["humidity_pct"] if dht else "---"
    soil_adc = soil.values["adc"] if soil else "---"
    flame_adc = flame.values["adc"] if flame else "---"

    row0 = f"T:{temp:>3}C H:{hum:>3}%".ljust(LCD_COLS)
    row1 = f"SOIL:{soil_adc:>4}".ljust(LCD_COLS)
    row2 = f"FLAME:{flame_adc:>4}".ljust(LCD_COLS)
    row3 = f"M:{motor.speed_pwm:>3} {DIRECTION_LABELS[motor.direction]}".ljust(LCD_COLS)
    return LcdBuffer(rows=(row0, row1, row2, row3))


@dataclass
class GatewayCounters:
    frames_handled: int = 0
    duplicates: int = 0
    decode_errors: int = 0
    uplinks_ok: int = 0
    uplinks_failed: int = 0

    def as_dict(self) -> dict:
        return {
            "frames_handled": self.frames_handled,
            "duplicates": self.duplicates,
            "decode_errors": self.decode_errors,
            "uplinks_ok": self.uplinks_ok,
            "uplinks_failed": self.uplinks_failed,
        }


class Gateway:
    """Root node of the star: all sensor traffic converges here."""

    def __init__(
        self,
        radio: Radio,
        store: TelemetryStore,
        sample_interval_us: int,
        motor_address: bytes,
        uplink_transport: UplinkTransport | None = None,
        uplink_url: str = "",
        api_key: str = "",
    ):
        self.radio = radio
        self.store = store
        self.sample_interval_us = sample_interval_us
        self.motor_address = motor_address
        self.uplink_transport = uplink_transport
        self.uplink_url = uplink_url.rstrip("/")
        self.api_key = api_key

        self.table = LatestTable()
        self.motor_view = MotorState()
        self.counters = GatewayCounters()
        self.commands: list[CommandEntry] = []
        self._next_command_id = 1
        self._last_seq: dict[str, int] = {}
        self._seq = 0
        self.lcd = render_lcd(self.table, self.motor_view)

    # -- Frame intake ---------------------------------------------------------

    def on_frame(self, frame: LinkFrame | bytes, now_us: int) -> TelemetryRecord | None:
        """Handle one inbound frame; returns the stored record, if any.

        Raw octets are decoded first; any codec failure (bad CRC, bad
        ranges, unknown payload) increments the error counter and is
        otherwise ignored.  Retransmitted duplicates - same node, same
        sequence number - are counted and dropped.
        """
        try:
            if isinstance(frame, (bytes, bytearray)):
                frame = decode_frame(bytes(frame))
            value = decode_payload(frame.payload)
        except FrameError:
            self.counters.decode_errors += 1
            return None

        node = _TAG_TO_NODE.get(frame.payload[0])
        if node is None:
            # Motor commands are downlink-only; anything else is unknown.
            self.counters.decode_errors += 1
            return None

        if self._last_seq.get(node) == frame.seq:
            self.counters.duplicates += 1
            return None
        self._last_seq[node] = frame.seq
        self.counters.frames_handled += 1

        if isinstance(value, FlamePayload):
            kind, values = "flame", {"adc": value.adc}
        elif isinstance(value, SoilPayload):
            kind, values = "soil", {"adc": value.adc}
        elif isinstance(value, DhtPayload):
            kind, values = "dht", {"temp_c": value.temp_c, "humidity_pct": value.humidity_pct}
        elif isinstance(value, MotorStatus):
            kind = "motor"
            values = {"speed": value.speed, "direction": value.direction.name.lower()}
            self.motor_view = MotorState(speed_pwm=value.speed, direction=value.direction)
            self._resolve_command(value, now_us)
        else:
            self.counters.decode_errors += 1
            return None

        self.table.update(node, kind, values, now_us, frame.seq)
        record = self.store.append(now_us, node, kind, values)
        self.lcd = render_lcd(self.table, self.motor_view)
        return record

    def _resolve_command(self, status: MotorStatus, now_us: int) -> None:
        for entry in self.commands:
            if (
                entry.status is CommandStatus.PENDING
                and entry.speed == status.speed
                and entry.direction == status.direction
            ):
                entry.status = CommandStatus.ACKNOWLEDGED
                entry.resolved_t_us = now_us
                self.store.append(
                    now_us,
                    NODE_MOTOR,
                    "command",
                    {
                        "command_id": entry.command_id,
                        "speed": entry.speed,
                        "direction": entry.direction.name.lower(),
                        "origin": entry.origin,
                        "status": entry.status.value,
                    },
                )
                return

    # -- Downlink -------------------------------------------------------------

    def send_motor_command(
        self,
        medium: RadioMedium,
        speed: int,
        direction: Direction,
        now_us: int,
        origin: str = "api",
        command_id: int | None = None,
    ) -> tuple[CommandEntry, DeliveryReport]:
        """Frame and transmit a motor command to node 4; journal the attempt.

        The gateway swaps its radio to transmitter for the exchange and
        back to receiver so the status reply can land.  Callers that
        allocated a command id up front (the API queue) pass it in;
        otherwise ids are assigned sequentially here.
        """
        command = MotorCommand(speed=speed, direction=direction)
        if command_id is None:
            command_id = self._next_command_id
        entry = CommandEntry(
            command_id=command_id,
            speed=speed,
            direction=direction,
            origin=origin,
            issued_t_us=now_us,
        )
        self._next_command_id = max(self._next_command_id, command_id) + 1
        self.commands.append(entry)
        self.store.append(
            now_us,
            NODE_MOTOR,
            "command",
            {
                "command_id": entry.command_id,
                "speed": speed,
                "direction": direction.name.lower(),
                "origin": origin,
                "status": CommandStatus.PENDING.value,
            },
        )

        frame = LinkFrame(
            channel=self.radio.channel,
            address=self.motor_address,
            ack_requested=True,
            role_flags=TRANSMITTER,
            seq=self._seq,
            payload=encode_payload(command),
        )
        self._seq = (self._seq + 1) % 256
        self.radio.set_role(TRANSMITTER)
        try:
            report = medium.transmit(self.radio, frame, now_us)
        finally:
            self.radio.set_role(RECEIVER)

        if not report.delivered:
            entry.status = CommandStatus.FAILED
            entry.resolved_t_us = now_us
            self.store.append(
                now_us,
                NODE_MOTOR,
                "command",
                {
                    "command_id": entry.command_id,
                    "speed": speed,
                    "direction": direction.name.lower(),
                    "origin": origin,
                    "status": CommandStatus.FAILED.value,
                    "failure_reason": report.failure_reason.value
                    if report.failure_reason
                    else "",
                },
            )
        return entry, report

    def command_by_id(self, command_id: int) -> CommandEntry | None:
        for entry in self.commands:
            if entry.command_id == command_id:
                return entry
        return None

    # -- Uplink ---------------------------------------------------------------

    def build_uplink_query(self, now_us: int) -> str | None:
        """ThingSpeak-style query string for the current non-stale readings.

        field1 temperature, field2 humidity, field3 soil ADC, field4 flame
        ADC, field5 motor speed.  Returns None when nothing is fresh.
        """
        fields: list[tuple[str, str]] = []
        dht = self.table.get(NODE_DHT)
        if dht and not self.table.is_stale(NODE_DHT, now_us, self.sample_interval_us):
            fields.append(("field1", str(dht.values["temp_c"])))
            fields.append(("field2", str(dht.values["humidity_pct"])))
        soil = self.table.get(NODE_SOIL)
        if soil and not self.table.is_stale(NODE_SOIL, now_us, self.sample_interval_us):
            fields.append(("field3", str(soil.values["adc"])))
        flame = self.table.get(NODE_FLAME)
        if flame and not self.table.is_stale(NODE_FLAME, now_us, self.sample_interval_us):
            fields.append(("field4", str(flame.values["adc"])))
        if not fields:
            return None
        fields.append(("field5", str(self.motor_view.speed_pwm)))
        return urlencode([("api_key", self.api_key)] + fields)

    def uplink_latest(self, now_us: int) -> TelemetryRecord | None:
        """Push the latest table upstream; one retry on transport failure.

        Every outcome is journaled.  Raises MissingApiKey before any
        request, and UplinkUnreachable after the retry also fails (the
        failure is journaled first, so callers may treat it as data).
        """
        if self.uplink_transport is None:
            return None
        query = self.build_uplink_query(now_us)
        if query is None:
            return None
        if not self.api_key:
            raise MissingApiKey("uplink requires a configured api_key")
        url = f"{self.uplink_url}/update?{query}"

        outcome: dict = {"url": url}
        last_error: Exception | None = None
        for _ in range(2):
            try:
                status, body = self.uplink_transport.send(url)
            except TransportError as exc:
                last_error = exc
                continue
            if 200 <= status < 300 and body.strip() != "0":
                outcome.update({"outcome": "ok", "entry_id": body.strip()})
                self.counters.uplinks_ok += 1
                return self.store.append(now_us, "gateway", "uplink", outcome)
            outcome.update({"outcome": "rejected", "http_status": status, "body": body.strip()})
            self.counters.uplinks_failed += 1
            return self.store.append(now_us, "gateway", "uplink", outcome)

        outcome.update({"outcome": "unreachable", "detail": str(last_error)})
        self.counters.uplinks_failed += 1
        self.store.append(now_us, "gateway", "uplink", outcome)
        raise UplinkUnreachable(f"uplink failed after retry: {last_error}")

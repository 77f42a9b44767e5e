"""Link-layer frame and payload codec for the virtual 2.4 GHz radio links.

On-wire frame layout (big-endian for all multi-octet fields):

    | Offset | Size | Field   | Description                                |
    |--------|------|---------|--------------------------------------------|
    | 0      | 1    | channel | RF channel index, 0..125                   |
    | 1      | 5    | address | destination pipe address                   |
    | 6      | 1    | ctrl    | bit7 ack_requested, bit1 MOSI, bit0 MISO   |
    | 7      | 1    | seq     | sequence number, wraps mod 256             |
    | 8      | 1    | len     | payload length, 0..32                      |
    | 9      | len  | payload |                                            |
    | 9+len  | 2    | crc     | CRC-16/CCITT-FALSE over octets 0..9+len    |

Total encoded length is always 11 + len octets.  The CRC covers the whole
frame prefix including the channel octet, so any single-bit corruption is
caught either by the checksum or by a field-range check.

Sensor and command payloads are 3 octets: a tag followed by a 2-octet body.

    | Tag  | Meaning       | Body                                          |
    |------|---------------|-----------------------------------------------|
    | 0x01 | flame ADC     | uint16 ADC value, 0..1023                     |
    | 0x02 | soil ADC      | uint16 ADC value, 0..1023                     |
    | 0x03 | temp/humidity | int8 degrees C, uint8 percent                 |
    | 0x10 | motor command | uint8 speed, uint8 direction (0/1/2)          |
    | 0x11 | motor status  | uint8 speed, uint8 direction (0/1/2)          |
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

MAX_CHANNEL = 125          # 126 channels total, indices 0..125
MAX_PAYLOAD_LEN = 32       # device-class fixed payload cap
HEADER_LEN = 9             # channel + address + ctrl + seq + len
CRC_LEN = 2
MIN_FRAME_LEN = HEADER_LEN + CRC_LEN

ADDRESS_LEN = 5

CTRL_ACK_BIT = 0x80
CTRL_MOSI_BIT = 0x02
CTRL_MISO_BIT = 0x01

ADC_MAX = 1023             # 10-bit converters on the emulated boards


class FrameError(ValueError):
    """Base class for frame and payload codec failures."""


class InvalidChannel(FrameError):
    pass


class PayloadTooLong(FrameError):
    pass


class Truncated(FrameError):
    pass


class CrcMismatch(FrameError):
    pass


class LengthFieldMismatch(FrameError):
    pass


class IllegalRoleFlags(FrameError):
    pass


class UnknownTag(FrameError):
    pass


class BodyLengthMismatch(FrameError):
    pass


class InvalidDirection(FrameError):
    pass


class ValueOutOfRange(FrameError):
    pass


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xor-out.

    Published check value: crc16(b"123456789") == 0x29B1.
    """
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


@dataclass(frozen=True)
class RadioRole:
    """MOSI/MISO flag pair carried in the ctrl octet.

    A radio acting as transmitter sets MOSI=1, MISO=0; a receiver the
    inverse.  Other combinations are encodable but rejected on decode.
    """

    mosi: int = 0
    miso: int = 0

    @property
    def is_legal(self) -> bool:
        return (self.mosi, self.miso) in ((1, 0), (0, 1))

    @property
    def is_transmitter(self) -> bool:
        return (self.mosi, self.miso) == (1, 0)

    @property
    def is_receiver(self) -> bool:
        return (self.mosi, self.miso) == (0, 1)


TRANSMITTER = RadioRole(mosi=1, miso=0)
RECEIVER = RadioRole(mosi=0, miso=1)


@dataclass(frozen=True)
class LinkFrame:
    """One on-air unit.  `crc` is filled in by decode and ignored on encode."""

    channel: int
    address: bytes
    ack_requested: bool = False
    role_flags: RadioRole = TRANSMITTER
    seq: int = 0
    payload: bytes = b""
    crc: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.channel <= MAX_CHANNEL:
            raise InvalidChannel(
                f"channel must be 0..{MAX_CHANNEL}, got {self.channel}"
            )
        if len(self.address) != ADDRESS_LEN:
            raise FrameError(
                f"address must be {ADDRESS_LEN} octets, got {len(self.address)}"
            )
        if not 0 <= self.seq <= 0xFF:
            raise FrameError(f"seq must be 0..255, got {self.seq}")
        if len(self.payload) > MAX_PAYLOAD_LEN:
            raise PayloadTooLong(
                f"payload is {len(self.payload)} octets, max {MAX_PAYLOAD_LEN}"
            )


def encode_frame(frame: LinkFrame) -> bytes:
    """Serialize a frame, computing the trailing CRC.

    The frame's own `crc` field is ignored; the checksum is always
    recomputed over the serialized prefix.
    """
    ctrl = 0
    if frame.ack_requested:
        ctrl |= CTRL_ACK_BIT
    if frame.role_flags.mosi:
        ctrl |= CTRL_MOSI_BIT
    if frame.role_flags.miso:
        ctrl |= CTRL_MISO_BIT
    prefix = (
        bytes([frame.channel])
        + frame.address
        + bytes([ctrl, frame.seq, len(frame.payload)])
        + frame.payload
    )
    return prefix + struct.pack(">H", crc16(prefix))


def decode_frame(data: bytes) -> LinkFrame:
    """Parse raw octets into a LinkFrame, validating CRC and field ranges.

    Total over arbitrary input: any octet-sequence either decodes or
    raises a FrameError subclass.

    Raises:
        Truncated: fewer than 11 octets, or shorter than the length
            field implies.
        LengthFieldMismatch: length field disagrees with actual size.
        CrcMismatch: checksum failure.
        InvalidChannel, PayloadTooLong, IllegalRoleFlags: field range
            violations (checked after the CRC passes).
    """
    if len(data) < MIN_FRAME_LEN:
        raise Truncated(f"frame is {len(data)} octets, minimum {MIN_FRAME_LEN}")
    payload_len = data[8]
    if payload_len > MAX_PAYLOAD_LEN:
        raise PayloadTooLong(
            f"length field {payload_len} exceeds max {MAX_PAYLOAD_LEN}"
        )
    expected = MIN_FRAME_LEN + payload_len
    if len(data) < expected:
        raise Truncated(
            f"length field says {payload_len} payload octets, "
            f"frame is only {len(data)} octets"
        )
    if len(data) > expected:
        raise LengthFieldMismatch(
            f"length field says {payload_len} payload octets, "
            f"frame is {len(data)} octets (expected {expected})"
        )

    prefix = data[:-CRC_LEN]
    (received_crc,) = struct.unpack(">H", data[-CRC_LEN:])
    computed_crc = crc16(prefix)
    if received_crc != computed_crc:
        raise CrcMismatch(
            f"crc received 0x{received_crc:04X}, computed 0x{computed_crc:04X}"
        )

    channel = data[0]
    ctrl = data[6]
    role = RadioRole(
        mosi=(ctrl & CTRL_MOSI_BIT) >> 1,
        miso=ctrl & CTRL_MISO_BIT,
    )
    if not role.is_legal:
        raise IllegalRoleFlags(
            f"ctrl MOSI/MISO bits ({role.mosi},{role.miso}) are not a legal role"
        )
    if ctrl & ~(CTRL_ACK_BIT | CTRL_MOSI_BIT | CTRL_MISO_BIT):
        raise FrameError(f"reserved ctrl bits set: 0x{ctrl:02X}")

    return LinkFrame(
        channel=channel,
        address=data[1:6],
        ack_requested=bool(ctrl & CTRL_ACK_BIT),
        role_flags=role,
        seq=data[7],
        payload=data[HEADER_LEN : HEADER_LEN + payload_len],
        crc=received_crc,
    )


# -- Sensor and command payloads ---------------------------------------------

TAG_FLAME = 0x01
TAG_SOIL = 0x02
TAG_DHT = 0x03
TAG_MOTOR_COMMAND = 0x10
TAG_MOTOR_STATUS = 0x11

PAYLOAD_LEN = 3  # tag + 2 body octets, for every tag


class Direction(IntEnum):
    STOP = 0
    FORWARD = 1
    REVERSE = 2


def _check_range(name: str, value: int, lo: int, hi: int) -> None:
    if not lo <= value <= hi:
        raise ValueOutOfRange(f"{name} must be {lo}..{hi}, got {value}")


@dataclass(frozen=True)
class FlamePayload:
    adc: int

    def __post_init__(self) -> None:
        _check_range("flame adc", self.adc, 0, ADC_MAX)


@dataclass(frozen=True)
class SoilPayload:
    adc: int

    def __post_init__(self) -> None:
        _check_range("soil adc", self.adc, 0, ADC_MAX)


@dataclass(frozen=True)
class DhtPayload:
    temp_c: int
    humidity_pct: int

    def __post_init__(self) -> None:
        # Whole degrees: the emulated sensor has 1 degree / 1 percent
        # resolution, so the wire format carries integers.
        _check_range("temp_c", self.temp_c, -40, 85)
        _check_range("humidity_pct", self.humidity_pct, 0, 100)


@dataclass(frozen=True)
class MotorCommand:
    speed: int
    direction: Direction

    def __post_init__(self) -> None:
        _check_range("speed", self.speed, 0, 255)
        if self.direction not in (Direction.STOP, Direction.FORWARD, Direction.REVERSE):
            raise InvalidDirection(f"direction code {self.direction} not in 0..2")


@dataclass(frozen=True)
class MotorStatus:
    speed: int
    direction: Direction

    def __post_init__(self) -> None:
        _check_range("speed", self.speed, 0, 255)
        if self.direction not in (Direction.STOP, Direction.FORWARD, Direction.REVERSE):
            raise InvalidDirection(f"direction code {self.direction} not in 0..2")


Payload = FlamePayload | SoilPayload | DhtPayload | MotorCommand | MotorStatus


def encode_payload(value: Payload) -> bytes:
    """Serialize a typed payload value to its 3-octet wire form."""
    if isinstance(value, FlamePayload):
        return struct.pack(">BH", TAG_FLAME, value.adc)
    if isinstance(value, SoilPayload):
        return struct.pack(">BH", TAG_SOIL, value.adc)
    if isinstance(value, DhtPayload):
        return struct.pack(">BbB", TAG_DHT, value.temp_c, value.humidity_pct)
    if isinstance(value, MotorCommand):
        return struct.pack(">BBB", TAG_MOTOR_COMMAND, value.speed, int(value.direction))
    if isinstance(value, MotorStatus):
        return struct.pack(">BBB", TAG_MOTOR_STATUS, value.speed, int(value.direction))
    raise UnknownTag(f"cannot encode {type(value).__name__}")


def decode_payload(data: bytes) -> Payload:
    """Parse a 3-octet payload into its typed value (exact inverse of encode).

    Raises:
        UnknownTag: tag octet not assigned.
        BodyLengthMismatch: payload is not tag + 2 body octets.
        InvalidDirection: motor direction code outside 0..2.
        ValueOutOfRange: in-range tag but out-of-range body value.
    """
    if len(data) < 1:
        raise BodyLengthMismatch("empty payload")
    tag = data[0]
    if tag not in (TAG_FLAME, TAG_SOIL, TAG_DHT, TAG_MOTOR_COMMAND, TAG_MOTOR_STATUS):
        raise UnknownTag(f"unknown payload tag 0x{tag:02X}")
    if len(data) != PAYLOAD_LEN:
        raise BodyLengthMismatch(
            f"tag 0x{tag:02X} expects {PAYLOAD_LEN - 1} body octets, "
            f"got {len(data) - 1}"
        )
    body = data[1:]
    if tag == TAG_FLAME:
        return FlamePayload(adc=struct.unpack(">H", body)[0])
    if tag == TAG_SOIL:
        return SoilPayload(adc=struct.unpack(">H", body)[0])
    if tag == TAG_DHT:
        temp, hum = struct.unpack(">bB", body)
        return DhtPayload(temp_c=temp, humidity_pct=hum)
    speed, code = struct.unpack(">BB", body)
    if code > 2:
        raise InvalidDirection(f"direction code {code} not in 0..2")
    cls = MotorCommand if tag == TAG_MOTOR_COMMAND else MotorStatus
    return cls(speed=speed, direction=Direction(code))

"""Frame and payload codec: layout, round-trips, corruption detection."""

import struct

import pytest
from hypothesis import given, strategies as st

from wsn_twin.frames import (
    BodyLengthMismatch,
    CrcMismatch,
    DhtPayload,
    Direction,
    FlamePayload,
    FrameError,
    IllegalRoleFlags,
    InvalidChannel,
    InvalidDirection,
    LengthFieldMismatch,
    LinkFrame,
    MotorCommand,
    MotorStatus,
    PayloadTooLong,
    RECEIVER,
    RadioRole,
    SoilPayload,
    TRANSMITTER,
    Truncated,
    UnknownTag,
    ValueOutOfRange,
    crc16,
    decode_frame,
    decode_payload,
    encode_frame,
    encode_payload,
)

ADDR = b"NODE1"
GATEWAY = b"GATEW"


def make_frame(**kwargs) -> LinkFrame:
    defaults = dict(
        channel=76,
        address=GATEWAY,
        ack_requested=True,
        role_flags=TRANSMITTER,
        seq=5,
        payload=b"\x01\x02\x03",
    )
    defaults.update(kwargs)
    return LinkFrame(**defaults)


# -- Frame layout --------------------------------------------------------------


def test_all_zero_frame_layout():
    frame = LinkFrame(
        channel=0,
        address=bytes(5),
        ack_requested=False,
        role_flags=RadioRole(0, 0),
        seq=0,
        payload=b"",
    )
    encoded = encode_frame(frame)
    assert len(encoded) == 11
    assert encoded[:9] == bytes(9)
    assert encoded[9:] == struct.pack(">H", crc16(bytes(9)))


def test_encoded_length_is_11_plus_payload():
    for n in (0, 1, 16, 32):
        assert len(encode_frame(make_frame(payload=bytes(n)))) == 11 + n


def test_full_payload_yields_43_octets():
    assert len(encode_frame(make_frame(payload=bytes(32)))) == 43


def test_channel_126_rejected():
    with pytest.raises(InvalidChannel):
        encode_frame(make_frame(channel=126))


def test_payload_over_32_rejected():
    with pytest.raises(PayloadTooLong):
        encode_frame(make_frame(payload=bytes(33)))


def test_ctrl_bit_assignment():
    encoded = encode_frame(make_frame(ack_requested=True, role_flags=TRANSMITTER))
    assert encoded[6] == 0x82  # ack bit7 + mosi bit1
    encoded = encode_frame(make_frame(ack_requested=False, role_flags=RECEIVER))
    assert encoded[6] == 0x01  # miso bit0


def test_crc_is_big_endian_over_whole_prefix():
    frame = make_frame()
    encoded = encode_frame(frame)
    assert encoded[-2:] == struct.pack(">H", crc16(encoded[:-2]))


# -- Decode ---------------------------------------------------------------------


def test_round_trip_example():
    frame = make_frame()
    assert decode_frame(encode_frame(frame)) == frame


def test_decoded_crc_field_is_filled():
    encoded = encode_frame(make_frame())
    decoded = decode_frame(encoded)
    assert decoded.crc == struct.unpack(">H", encoded[-2:])[0]


def test_short_input_truncated():
    with pytest.raises(Truncated):
        decode_frame(b"\x01\x02\x03\x04\x05")


def test_empty_input_truncated():
    with pytest.raises(Truncated):
        decode_frame(b"")


def test_length_field_mismatch():
    encoded = bytearray(encode_frame(make_frame(payload=b"ab")))
    # Valid CRC but one extra trailing octet.
    with pytest.raises(LengthFieldMismatch):
        decode_frame(bytes(encoded) + b"\x00")


def test_illegal_role_flags_rejected():
    frame = make_frame(role_flags=RadioRole(1, 1))
    with pytest.raises(IllegalRoleFlags):
        decode_frame(encode_frame(frame))
    frame = make_frame(role_flags=RadioRole(0, 0))
    with pytest.raises(IllegalRoleFlags):
        decode_frame(encode_frame(frame))


def test_crafted_high_channel_rejected():
    # Hand-build a frame with channel 126 and a correct CRC: the range
    # check must still fire after the checksum passes.
    prefix = bytes([126]) + GATEWAY + bytes([0x02, 0, 0])
    data = prefix + struct.pack(">H", crc16(prefix))
    with pytest.raises(InvalidChannel):
        decode_frame(data)


def test_exhaustive_single_bit_flip_detection():
    frame = make_frame(payload=bytes(range(32)))
    encoded = encode_frame(frame)
    assert len(encoded) == 43
    detected = 0
    for bit in range(len(encoded) * 8):
        corrupted = bytearray(encoded)
        corrupted[bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(FrameError):
            decode_frame(bytes(corrupted))
        detected += 1
    assert detected == 344


@given(
    channel=st.integers(0, 125),
    address=st.binary(min_size=5, max_size=5),
    ack=st.booleans(),
    role=st.sampled_from([TRANSMITTER, RECEIVER]),
    seq=st.integers(0, 255),
    payload=st.binary(max_size=32),
)
def test_round_trip_property(channel, address, ack, role, seq, payload):
    frame = LinkFrame(
        channel=channel,
        address=address,
        ack_requested=ack,
        role_flags=role,
        seq=seq,
        payload=payload,
    )
    encoded = encode_frame(frame)
    assert len(encoded) == 11 + len(payload)
    assert decode_frame(encoded) == frame


@given(st.binary(max_size=64))
def test_decode_total_over_arbitrary_input(data):
    try:
        decode_frame(data)
    except FrameError:
        pass


# -- Payload codec ----------------------------------------------------------------


def test_dht_payload_reference_bytes():
    assert encode_payload(DhtPayload(temp_c=33, humidity_pct=70)) == b"\x03\x21\x46"


def test_soil_payload_reference_bytes():
    assert encode_payload(SoilPayload(adc=293)) == b"\x02\x01\x25"


def test_motor_stop_command_bytes():
    assert encode_payload(MotorCommand(speed=0, direction=Direction.STOP)) == b"\x10\x00\x00"


def test_flame_payload_bytes():
    assert encode_payload(FlamePayload(adc=1023)) == b"\x01\x03\xff"


def test_motor_status_bytes():
    assert (
        encode_payload(MotorStatus(speed=200, direction=Direction.REVERSE))
        == b"\x11\xc8\x02"
    )


def test_negative_temperature_round_trip():
    payload = DhtPayload(temp_c=-9, humidity_pct=30)
    assert decode_payload(encode_payload(payload)) == payload


@pytest.mark.parametrize(
    "value",
    [
        FlamePayload(adc=0),
        FlamePayload(adc=1023),
        SoilPayload(adc=293),
        DhtPayload(temp_c=33, humidity_pct=70),
        DhtPayload(temp_c=-40, humidity_pct=0),
        MotorCommand(speed=128, direction=Direction.FORWARD),
        MotorStatus(speed=255, direction=Direction.REVERSE),
    ],
)
def test_payload_round_trip(value):
    assert decode_payload(encode_payload(value)) == value


def test_payload_round_trip_exhaustive_motor_commands():
    for direction in Direction:
        for speed in range(256):
            value = MotorCommand(speed=speed, direction=direction)
            assert decode_payload(encode_payload(value)) == value


def test_unknown_tag():
    with pytest.raises(UnknownTag):
        decode_payload(b"\x7f\x00\x00")


def test_body_length_mismatch():
    with pytest.raises(BodyLengthMismatch):
        decode_payload(b"\x01\x00")
    with pytest.raises(BodyLengthMismatch):
        decode_payload(b"\x01\x00\x00\x00")
    with pytest.raises(BodyLengthMismatch):
        decode_payload(b"")


def test_invalid_direction_code():
    with pytest.raises(InvalidDirection):
        decode_payload(b"\x10\x40\x03")


def test_out_of_range_values_rejected():
    with pytest.raises(ValueOutOfRange):
        FlamePayload(adc=1024)
    with pytest.raises(ValueOutOfRange):
        SoilPayload(adc=-1)
    with pytest.raises(ValueOutOfRange):
        DhtPayload(temp_c=90, humidity_pct=50)
    with pytest.raises(ValueOutOfRange):
        MotorCommand(speed=256, direction=Direction.STOP)

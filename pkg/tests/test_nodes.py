"""Node state machines: sampling ticks, sequence numbers, motor behaviour."""

import pytest

from wsn_twin.frames import (
    Direction,
    DhtPayload,
    FlamePayload,
    MotorCommand,
    RECEIVER,
    SoilPayload,
    TRANSMITTER,
    decode_payload,
    encode_payload,
    LinkFrame,
)
from wsn_twin.medium import LossModel, RadioConfig, RadioMedium
from wsn_twin.nodes import (
    DhtNode,
    FlameNode,
    MotorNode,
    MotorState,
    SoilNode,
    apply_motor_command,
)
from wsn_twin.profile import DhtNoise, ScenarioProfile, US_PER_MINUTE

MIN = US_PER_MINUTE
GATEWAY_ADDR = b"GATEW"


def build_profile(**kwargs) -> ScenarioProfile:
    defaults = dict(
        run_start_us=0,
        run_end_us=240 * MIN,
        sample_interval_us=30 * MIN,
        soil_curve=((0, 300.0),),
        temp_curve=((0, 33.0),),
        humidity_curve=((0, 70.0),),
    )
    defaults.update(kwargs)
    return ScenarioProfile(**defaults)


def build_network(profile: ScenarioProfile):
    medium = RadioMedium(LossModel(probability=0.0, seed=1))
    gateway_radio = medium.register(
        RadioConfig(address=GATEWAY_ADDR, role=RECEIVER)
    )
    flame = FlameNode(
        medium.register(RadioConfig(address=b"NODE1", role=TRANSMITTER)),
        GATEWAY_ADDR,
        profile,
    )
    soil = SoilNode(
        medium.register(RadioConfig(address=b"NODE2", role=TRANSMITTER)),
        GATEWAY_ADDR,
        profile,
    )
    dht = DhtNode(
        medium.register(RadioConfig(address=b"NODE3", role=TRANSMITTER)),
        GATEWAY_ADDR,
        profile,
        DhtNoise(seed=1),
    )
    motor = MotorNode(
        medium.register(RadioConfig(address=b"NODE4", role=RECEIVER)),
        GATEWAY_ADDR,
    )
    return medium, gateway_radio, flame, soil, dht, motor


# -- Motor state ----------------------------------------------------------------


def test_motor_duty_reference_values():
    state, status = apply_motor_command(
        MotorState(), MotorCommand(speed=128, direction=Direction.FORWARD)
    )
    assert state.duty_cycle == pytest.approx(128 / 255)
    assert (state.in3, state.in4) == (1, 0)
    assert (status.speed, status.direction) == (128, Direction.FORWARD)


def test_motor_stop_overrides_speed():
    state, _ = apply_motor_command(
        MotorState(), MotorCommand(speed=200, direction=Direction.STOP)
    )
    assert state.duty_cycle == 0.0
    assert (state.in3, state.in4) == (0, 0)


def test_motor_full_scale_reverse():
    state, _ = apply_motor_command(
        MotorState(), MotorCommand(speed=255, direction=Direction.REVERSE)
    )
    assert state.duty_cycle == 1.0
    assert (state.in3, state.in4) == (0, 1)


def test_motor_pin_direction_bijection_exhaustive():
    pins_seen = {}
    for direction in Direction:
        for speed in range(256):
            state, _ = apply_motor_command(
                MotorState(), MotorCommand(speed=speed, direction=direction)
            )
            assert 0.0 <= state.duty_cycle <= 1.0
            pins_seen.setdefault(direction, set()).add((state.in3, state.in4))
    assert pins_seen[Direction.FORWARD] == {(1, 0)}
    assert pins_seen[Direction.REVERSE] == {(0, 1)}
    assert pins_seen[Direction.STOP] == {(0, 0)}


# -- Sensor ticks ----------------------------------------------------------------


def test_tick_off_grid_no_transmission():
    profile = build_profile()
    medium, _, flame, _, _, _ = build_network(profile)
    assert flame.tick(medium, 7 * MIN) is None
    assert medium.stats.transmissions == 0


def test_tick_on_grid_delivers_one_frame():
    profile = build_profile()
    medium, gw, flame, _, _, _ = build_network(profile)
    report = flame.tick(medium, 30 * MIN)
    assert report is not None and report.delivered
    delivered = medium.step(31 * MIN)
    frames = delivered[GATEWAY_ADDR]
    assert len(frames) == 1
    assert decode_payload(frames[0].payload) == FlamePayload(adc=0)


def test_end_to_end_codec_consistency_all_sensors():
    profile = build_profile(
        flame_windows=(),
        soil_curve=((0, 293.0),),
        temp_curve=((0, 33.0),),
        humidity_curve=((0, 70.0),),
    )
    medium, _, flame, soil, dht, _ = build_network(profile)
    t = 60 * MIN
    flame.tick(medium, t, tx_at_us=t)
    medium_step_1 = medium.step(t + 200)
    soil.tick(medium, t, tx_at_us=t + 200)
    medium_step_2 = medium.step(t + 400)
    dht.tick(medium, t, tx_at_us=t + 400)
    medium_step_3 = medium.step(t + 600)

    payloads = [
        decode_payload(frames[0].payload)
        for step in (medium_step_1, medium_step_2, medium_step_3)
        for frames in step.values()
    ]
    assert payloads[0] == FlamePayload(adc=flame.sample(t).adc)
    assert payloads[1] == SoilPayload(adc=soil.sample(t).adc)
    reading = dht.sample(t)
    assert payloads[2] == DhtPayload(temp_c=reading.temp_c, humidity_pct=reading.humidity_pct)


def test_seq_wraps_after_256_ticks():
    profile = build_profile(
        run_end_us=256 * MIN,
        sample_interval_us=MIN,
    )
    medium, _, flame, _, _, _ = build_network(profile)
    initial = flame.seq
    now = 0
    for i in range(256):
        t = i * MIN
        report = flame.tick(medium, t, tx_at_us=max(now, t))
        assert report is not None
        now = max(now, t) + report.airtime_us_total + 1
        medium.step(now)
    assert flame.seq == initial


def test_seq_increments_mod_256():
    profile = build_profile(sample_interval_us=MIN, run_end_us=5 * MIN)
    medium, _, flame, _, _, _ = build_network(profile)
    flame.seq = 255
    report = flame.tick(medium, 0)
    assert report is not None
    assert flame.seq == 0


# -- Motor node over the air -------------------------------------------------------


def test_motor_node_applies_command_and_replies():
    profile = build_profile()
    medium, gw_radio, _, _, _, motor = build_network(profile)
    command_frame = LinkFrame(
        channel=motor.radio.channel,
        address=b"NODE4",
        ack_requested=True,
        role_flags=TRANSMITTER,
        seq=9,
        payload=encode_payload(MotorCommand(speed=90, direction=Direction.REVERSE)),
    )
    report = motor.handle_frame(medium, command_frame, 1000)
    assert report is not None and report.delivered
    assert motor.state.speed_pwm == 90
    assert (motor.state.in3, motor.state.in4) == (0, 1)
    delivered = medium.step(10_000)
    status = decode_payload(delivered[GATEWAY_ADDR][0].payload)
    assert (status.speed, status.direction) == (90, Direction.REVERSE)
    # Radio returned to receiver role after the reply.
    assert motor.radio.role.is_receiver


def test_motor_node_ignores_non_command_payload():
    profile = build_profile()
    medium, _, _, _, _, motor = build_network(profile)
    frame = LinkFrame(
        channel=motor.radio.channel,
        address=b"NODE4",
        ack_requested=False,
        role_flags=TRANSMITTER,
        seq=1,
        payload=encode_payload(FlamePayload(adc=1)),
    )
    assert motor.handle_frame(medium, frame, 0) is None
    assert motor.state == MotorState()

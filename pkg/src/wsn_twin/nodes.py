"""State machines for the four emulated nodes.

Nodes 1-3 are sensors: on each scheduled sample instant they read the
environment profile, wrap the reading in a 3-octet payload, and send it to
the gateway with acknowledgement requested.  Node 4 drives a DC motor
through an H-bridge: it accepts speed/direction command frames from the
gateway and answers each with a status frame.

The motor model is electrical only - PWM duty and direction pins - with no
mechanical inertia.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frames import (
    Direction,
    DhtPayload,
    FlamePayload,
    InvalidDirection,
    LinkFrame,
    MotorCommand,
    MotorStatus,
    Payload,
    RECEIVER,
    SoilPayload,
    TRANSMITTER,
    decode_payload,
    encode_payload,
)
from .medium import DeliveryReport, Radio, RadioMedium
from .profile import (
    DhtNoise,
    DhtReading,
    FlameReading,
    ScenarioProfile,
    SoilReading,
    sample_dht11,
    sample_flame,
    sample_soil,
)

Reading = FlameReading | SoilReading | DhtReading

NODE_FLAME = "node1"
NODE_SOIL = "node2"
NODE_DHT = "node3"
NODE_MOTOR = "node4"


@dataclass(frozen=True)
class MotorState:
    """Electrical state of the motor channel on the H-bridge driver.

    IN3/IN4 select direction: (1,0) forward, (0,1) reverse, (0,0) stop.
    Stop forces the PWM duty to zero regardless of the commanded speed.
    """

    speed_pwm: int = 0
    direction: Direction = Direction.STOP

    @property
    def duty_cycle(self) -> float:
        if self.direction is Direction.STOP:
            return 0.0
        return self.speed_pwm / 255

    @property
    def in3(self) -> int:
        return 1 if self.direction is Direction.FORWARD else 0

    @property
    def in4(self) -> int:
        return 1 if self.direction is Direction.REVERSE else 0


def apply_motor_command(state: MotorState, command: MotorCommand) -> tuple[MotorState, MotorStatus]:
    """Apply a speed/direction command; returns the new state and the
    status payload echoed back to the gateway."""
    if command.direction not in (Direction.STOP, Direction.FORWARD, Direction.REVERSE):
        raise InvalidDirection(f"direction code {command.direction} not in 0..2")
    new_state = MotorState(speed_pwm=command.speed, direction=command.direction)
    return new_state, MotorStatus(speed=command.speed, direction=command.direction)


class SensorNode:
    """Common behaviour of the three sampling nodes."""

    node_id: str = ""

    def __init__(
        self,
        radio: Radio,
        gateway_address: bytes,
        profile: ScenarioProfile,
    ):
        self.radio = radio
        self.gateway_address = gateway_address
        self.profile = profile
        self.seq = 0

    def sample(self, t_us: int) -> Reading:
        raise NotImplementedError

    def payload_for(self, reading: Reading) -> Payload:
        raise NotImplementedError

    def tick(
        self,
        medium: RadioMedium,
        t_us: int,
        tx_at_us: int | None = None,
    ) -> DeliveryReport | None:
        """Sample and transmit if `t_us` is on the sample grid.

        `tx_at_us` lets the engine stagger the actual channel access while
        the reading itself stays stamped with the grid time.
        """
        if not self.profile.is_sample_instant(t_us):
            return None
        reading = self.sample(t_us)
        frame = LinkFrame(
            channel=self.radio.channel,
            address=self.gateway_address,
            ack_requested=True,
            role_flags=TRANSMITTER,
            seq=self.seq,
            payload=encode_payload(self.payload_for(reading)),
        )
        report = medium.transmit(self.radio, frame, tx_at_us if tx_at_us is not None else t_us)
        self.seq = (self.seq + 1) % 256
        return report


class FlameNode(SensorNode):
    node_id = NODE_FLAME

    def sample(self, t_us: int) -> FlameReading:
        return sample_flame(self.profile, t_us)

    def payload_for(self, reading: Reading) -> Payload:
        assert isinstance(reading, FlameReading)
        return FlamePayload(adc=reading.adc)


class SoilNode(SensorNode):
    node_id = NODE_SOIL

    def sample(self, t_us: int) -> SoilReading:
        return sample_soil(self.profile, t_us)

    def payload_for(self, reading: Reading) -> Payload:
        assert isinstance(reading, SoilReading)
        return SoilPayload(adc=reading.adc)


class DhtNode(SensorNode):
    node_id = NODE_DHT

    def __init__(
        self,
        radio: Radio,
        gateway_address: bytes,
        profile: ScenarioProfile,
        noise: DhtNoise,
    ):
        super().__init__(radio, gateway_address, profile)
        self.noise = noise

    def sample(self, t_us: int) -> DhtReading:
        return sample_dht11(self.profile, t_us, self.noise)

    def payload_for(self, reading: Reading) -> Payload:
        assert isinstance(reading, DhtReading)
        return DhtPayload(temp_c=reading.temp_c, humidity_pct=reading.humidity_pct)


class MotorNode:
    """Node 4: DC motor behind an H-bridge, commanded over the air."""

    node_id = NODE_MOTOR

    def __init__(self, radio: Radio, gateway_address: bytes):
        self.radio = radio
        self.gateway_address = gateway_address
        self.state = MotorState()
        self.seq = 0

    def handle_frame(
        self,
        medium: RadioMedium,
        frame: LinkFrame,
        tx_at_us: int,
    ) -> DeliveryReport | None:
        """Apply a motor-command frame and transmit the status reply.

        Non-command payloads are ignored (None).  The radio flips to
        transmitter for the reply and back to receiver afterwards.
        """
        value = decode_payload(frame.payload)
        if not isinstance(value, MotorCommand):
            return None
        self.state, status = apply_motor_command(self.state, value)
        reply = LinkFrame(
            channel=self.radio.channel,
            address=self.gateway_address,
            ack_requested=True,
            role_flags=TRANSMITTER,
            seq=self.seq,
            payload=encode_payload(status),
        )
        self.radio.set_role(TRANSMITTER)
        try:
            report = medium.transmit(self.radio, reply, tx_at_us)
        finally:
            self.radio.set_role(RECEIVER)
        self.seq = (self.seq + 1) % 256
        return report

"""Deterministic simulation of the shared 2.4 GHz medium.

The medium is a single event queue over integer microseconds of simulated
time.  Senders submit whole transmissions (first attempt plus any
retransmissions) with `transmit`, which resolves loss draws and the retry
schedule eagerly and returns a DeliveryReport.  `step` then releases every
frame copy whose completion time has been reached to the matching receiver.

Collisions: two transmissions whose occupancy windows overlap on the same
channel kill each other, with no capture effect.  Because time never moves
backwards, the overlap check at submission time sees every possible
conflict partner, so a returned report can only change once - from its
provisional outcome to Collision - and only before the medium is stepped
past its completion time.

Loss draws come from one seeded stream, consumed in submission order:
one draw per frame attempt, then one per ack (when an ack was requested
and the frame landed).  Identical seed and call sequence therefore
reproduce identical reports, byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .frames import (
    ADDRESS_LEN,
    MAX_CHANNEL,
    MAX_PAYLOAD_LEN,
    HEADER_LEN,
    CRC_LEN,
    FrameError,
    InvalidChannel,
    LinkFrame,
    PayloadTooLong,
    RadioRole,
)

DATA_RATES_BPS = (250_000, 1_000_000, 2_000_000)
RETRY_DELAY_US = 250          # fixed gap between retransmission attempts
MAX_RETRIES_LIMIT = 15
DEFAULT_TX_CURRENT_MA = 12    # transceiver draw while transmitting


class MediumError(Exception):
    """Base class for medium misuse (distinct from in-band delivery failures)."""


class DuplicateAddress(MediumError):
    pass


class NotRegistered(MediumError):
    pass


class TimeRegression(MediumError):
    pass


class RoleViolation(MediumError):
    pass


class UnsupportedDataRate(MediumError):
    pass


class FailureReason(str, Enum):
    MAX_RETRIES_EXCEEDED = "max_retries_exceeded"
    NO_RECEIVER_ON_CHANNEL = "no_receiver_on_channel"
    COLLISION = "collision"


@dataclass(frozen=True)
class RadioConfig:
    """Static parameters of one virtual transceiver."""

    address: bytes
    channel: int = 76
    data_rate_bps: int = 1_000_000
    role: RadioRole = RadioRole(mosi=1, miso=0)
    max_retries: int = 15
    tx_current_ma: float = DEFAULT_TX_CURRENT_MA

    def __post_init__(self) -> None:
        if not 0 <= self.channel <= MAX_CHANNEL:
            raise InvalidChannel(f"channel must be 0..{MAX_CHANNEL}, got {self.channel}")
        if len(self.address) != ADDRESS_LEN:
            raise FrameError(f"address must be {ADDRESS_LEN} octets")
        if self.data_rate_bps not in DATA_RATES_BPS:
            raise UnsupportedDataRate(
                f"data rate must be one of {DATA_RATES_BPS}, got {self.data_rate_bps}"
            )
        if not 0 <= self.max_retries <= MAX_RETRIES_LIMIT:
            raise MediumError(f"max_retries must be 0..{MAX_RETRIES_LIMIT}")


@dataclass(frozen=True)
class LossModel:
    """Bernoulli per-frame loss, seeded for reproducibility."""

    probability: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise MediumError(f"loss probability must be in [0,1], got {self.probability}")


@dataclass
class DeliveryReport:
    """Outcome of one transmit call, totalled over all attempts.

    `delivered` is the medium's omniscient view: true as soon as any frame
    copy reached the receiver, even if every acknowledgement was lost.
    """

    delivered: bool
    attempts: int
    airtime_us_total: int
    energy_maus: float
    failure_reason: FailureReason | None = None

    def as_dict(self) -> dict:
        return {
            "delivered": self.delivered,
            "attempts": self.attempts,
            "airtime_us_total": self.airtime_us_total,
            "energy_maus": self.energy_maus,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
        }


def airtime_us(payload_len: int, data_rate_bps: int) -> int:
    """Channel occupancy of one frame attempt, in whole microseconds.

    (11 + payload_len) octets at the given rate, rounded up.
    """
    if not 0 <= payload_len <= MAX_PAYLOAD_LEN:
        raise PayloadTooLong(f"payload length must be 0..{MAX_PAYLOAD_LEN}")
    if data_rate_bps not in DATA_RATES_BPS:
        raise UnsupportedDataRate(
            f"data rate must be one of {DATA_RATES_BPS}, got {data_rate_bps}"
        )
    bits = (HEADER_LEN + CRC_LEN + payload_len) * 8
    return -(-bits * 1_000_000 // data_rate_bps)


class Radio:
    """Handle returned by RadioMedium.register; role may be switched between calls."""

    def __init__(self, config: RadioConfig):
        self.config = config
        self.role = config.role

    @property
    def address(self) -> bytes:
        return self.config.address

    @property
    def channel(self) -> int:
        return self.config.channel

    def set_role(self, role: RadioRole) -> None:
        self.role = role

    def __repr__(self) -> str:
        return f"Radio(addr={self.address!r}, ch={self.channel}, role={self.role})"


@dataclass
class _Flight:
    """One in-flight transmission: all attempts of a single frame."""

    start_us: int
    end_us: int
    channel: int
    sender_address: bytes
    frame: LinkFrame
    receiver_address: bytes | None
    landing_times_us: list[int]
    report: DeliveryReport


@dataclass
class MediumStats:
    transmissions: int = 0
    delivered: int = 0
    failed: int = 0
    collisions: int = 0
    frames_handed_over: int = 0  # copies reaching receivers, duplicates included
    airtime_us_total: int = 0
    energy_maus_total: float = 0.0

    def as_dict(self) -> dict:
        return {
            "transmissions": self.transmissions,
            "delivered": self.delivered,
            "failed": self.failed,
            "collisions": self.collisions,
            "frames_handed_over": self.frames_handed_over,
            "airtime_us_total": self.airtime_us_total,
            "energy_maus_total": self.energy_maus_total,
        }


class RadioMedium:
    """The shared channelized medium all registered radios communicate over."""

    def __init__(self, loss: LossModel | None = None):
        self.loss = loss or LossModel()
        self._rng = random.Random(self.loss.seed)
        self._radios: dict[bytes, Radio] = {}
        self._flights: list[_Flight] = []
        self._now_us = 0
        self.stats = MediumStats()

    @property
    def now_us(self) -> int:
        return self._now_us

    def register(self, config: RadioConfig) -> Radio:
        """Join the medium. Addresses must be unique among live radios."""
        if config.address in self._radios:
            raise DuplicateAddress(f"address {config.address!r} already registered")
        radio = Radio(config)
        self._radios[config.address] = radio
        return radio

    def unregister(self, radio: Radio) -> None:
        if self._radios.get(radio.address) is not radio:
            raise NotRegistered(f"radio {radio!r} is not registered")
        del self._radios[radio.address]

    def _check_time(self, now_us: int) -> None:
        if now_us < self._now_us:
            raise TimeRegression(
                f"time went backwards: {now_us} < {self._now_us}"
            )

    def _find_receiver(self, channel: int, address: bytes) -> Radio | None:
        radio = self._radios.get(address)
        if radio is None:
            return None
        if radio.channel != channel or not radio.role.is_receiver:
            return None
        return radio

    def transmit(self, sender: Radio, frame: LinkFrame, now_us: int) -> DeliveryReport:
        """Submit one transmission (all attempts) starting at `now_us`.

        Delivery failures are reported in-band via the report; only misuse
        (unknown handle, wrong role, time regression) raises.
        """
        if self._radios.get(sender.address) is not sender:
            raise NotRegistered(f"radio {sender!r} is not registered")
        if not sender.role.is_transmitter:
            raise RoleViolation(f"radio {sender!r} must be in transmitter role to send")
        self._check_time(now_us)
        self._now_us = now_us

        per_attempt_us = airtime_us(len(frame.payload), sender.config.data_rate_bps)
        receiver = self._find_receiver(frame.channel, frame.address)
        max_attempts = sender.config.max_retries + 1 if frame.ack_requested else 1
        p = self.loss.probability

        landings: list[int] = []
        attempts = 0
        if receiver is None:
            # Nothing on the channel to receive or ack; an ack-requesting
            # sender still burns through its full retry budget.
            attempts = max_attempts
        else:
            for k in range(1, max_attempts + 1):
                attempts = k
                frame_lost = self._rng.random() < p
                if frame_lost:
                    continue
                landings.append(k)
                if not frame.ack_requested:
                    break
                ack_lost = self._rng.random() < p
                if not ack_lost:
                    break

        start = now_us
        end = start + attempts * per_attempt_us + (attempts - 1) * RETRY_DELAY_US
        airtime_total = attempts * per_attempt_us
        energy = sender.config.tx_current_ma * airtime_total

        delivered = bool(landings)
        if delivered:
            reason = None
        elif receiver is None:
            reason = FailureReason.NO_RECEIVER_ON_CHANNEL
        else:
            reason = FailureReason.MAX_RETRIES_EXCEEDED
        report = DeliveryReport(
            delivered=delivered,
            attempts=attempts,
            airtime_us_total=airtime_total,
            energy_maus=energy,
            failure_reason=reason,
        )

        landing_times = [
            start + k * per_attempt_us + (k - 1) * RETRY_DELAY_US for k in landings
        ]
        flight = _Flight(
            start_us=start,
            end_us=end,
            channel=frame.channel,
            sender_address=sender.address,
            frame=frame,
            receiver_address=receiver.address if receiver else None,
            landing_times_us=landing_times,
            report=report,
        )

        # Any conflicting partner must still be unresolved (time is
        # monotonic), so checking here catches every collision pair.
        for other in self._flights:
            if other.channel != flight.channel:
                continue
            if other.start_us < flight.end_us and flight.start_us < other.end_us:
                self._collide(other)
                self._collide(flight)

        self._flights.append(flight)

        self.stats.transmissions += 1
        self.stats.airtime_us_total += airtime_total
        self.stats.energy_maus_total += energy
        return report

    def _collide(self, flight: _Flight) -> None:
        if flight.report.failure_reason is FailureReason.COLLISION:
            return
        flight.report.delivered = False
        flight.report.failure_reason = FailureReason.COLLISION
        flight.landing_times_us = []
        self.stats.collisions += 1

    def step(self, now_us: int) -> dict[bytes, list[LinkFrame]]:
        """Resolve every transmission completing at or before `now_us`.

        Returns frame copies per receiver address, in resolution order:
        (completion time, sender address) lexicographic.  Duplicate copies
        (frame landed, ack lost, sender retried) appear once per landing.
        """
        self._check_time(now_us)
        self._now_us = now_us

        due = [f for f in self._flights if f.end_us <= now_us]
        due.sort(key=lambda f: (f.end_us, f.sender_address))
        delivered: dict[bytes, list[LinkFrame]] = {}
        for flight in due:
            self._flights.remove(flight)
            if flight.report.delivered and flight.receiver_address is not None:
                copies = len(flight.landing_times_us)
                delivered.setdefault(flight.receiver_address, []).extend(
                    [flight.frame] * copies
                )
                self.stats.frames_handed_over += copies
                self.stats.delivered += 1
            else:
                self.stats.failed += 1
        return delivered

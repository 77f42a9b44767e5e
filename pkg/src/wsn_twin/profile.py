"""Time-indexed environment truth and the sensor sampling models.

A ScenarioProfile holds what the environment is actually doing - flame
intervals and piecewise-linear soil/temperature/humidity curves - over a
run window, all on the simulation's integer-microsecond clock (t=0 at the
start of the run window).

Sampling is deterministic.  The temperature/humidity sensor adds a seeded
error of -1, 0, or +1 to each field; the draw depends only on (seed, node,
sample time), never on call order, so re-sampling the same instant always
reproduces the same reading.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

US_PER_SECOND = 1_000_000
US_PER_MINUTE = 60 * US_PER_SECOND

ADC_MAX = 1023

# Operating envelope of the emulated DHT11-class sensor; readings clamp here.
DHT_TEMP_MIN_C = 0
DHT_TEMP_MAX_C = 50
DHT_HUMIDITY_MIN_PCT = 20
DHT_HUMIDITY_MAX_PCT = 90

DEFAULT_SAMPLE_INTERVAL_US = 30 * US_PER_MINUTE
DEFAULT_FLAME_PEAK_ADC = 1023


class ProfileError(ValueError):
    pass


class OutOfWindow(ProfileError):
    pass


def round_half_up(x: float) -> int:
    """Nearest integer, ties toward positive infinity."""
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class FlameWindow:
    start_us: int
    end_us: int
    peak_adc: int = DEFAULT_FLAME_PEAK_ADC

    def __post_init__(self) -> None:
        if self.start_us >= self.end_us:
            raise ProfileError("flame window must have start < end")
        if not 0 <= self.peak_adc <= ADC_MAX:
            raise ProfileError(f"flame peak must be 0..{ADC_MAX}")

    def covers(self, t_us: int) -> bool:
        return self.start_us <= t_us < self.end_us


Curve = tuple[tuple[int, float], ...]


def interpolate(curve: Curve, t_us: int) -> float:
    """Piecewise-linear interpolation with constant extension past the ends."""
    if not curve:
        raise ProfileError("curve has no points")
    if t_us <= curve[0][0]:
        return curve[0][1]
    if t_us >= curve[-1][0]:
        return curve[-1][1]
    for (t0, v0), (t1, v1) in zip(curve, curve[1:]):
        if t0 <= t_us <= t1:
            if t1 == t0:
                return v1
            return v0 + (v1 - v0) * (t_us - t0) / (t1 - t0)
    raise AssertionError("unreachable: curve is time-sorted")


def _check_curve(name: str, curve: Curve, start_us: int, end_us: int) -> None:
    times = [t for t, _ in curve]
    if times != sorted(times):
        raise ProfileError(f"{name} points must be time-sorted")
    for t, _ in curve:
        if not start_us <= t <= end_us:
            raise ProfileError(f"{name} point at t={t}us lies outside the run window")


@dataclass(frozen=True)
class ScenarioProfile:
    """Environment truth over one run window.

    `clock_offset_us` is the run start expressed as microseconds since
    midnight of the scenario date; node sampling happens at the multiples
    of `sample_interval_us` (measured from midnight) that fall inside the
    run window, mirroring how the real deployment logged on round
    half-hours.
    """

    run_start_us: int = 0
    run_end_us: int = 4 * 60 * US_PER_MINUTE
    sample_interval_us: int = DEFAULT_SAMPLE_INTERVAL_US
    clock_offset_us: int = 0
    flame_windows: tuple[FlameWindow, ...] = ()
    soil_curve: Curve = ((0, 512.0),)
    temp_curve: Curve = ((0, 25.0),)
    humidity_curve: Curve = ((0, 50.0),)

    def __post_init__(self) -> None:
        if self.run_start_us >= self.run_end_us:
            raise ProfileError("run window must have start < end")
        if self.sample_interval_us <= 0:
            raise ProfileError("sample interval must be positive")
        _check_curve("soil_curve", self.soil_curve, self.run_start_us, self.run_end_us)
        _check_curve("temp_curve", self.temp_curve, self.run_start_us, self.run_end_us)
        _check_curve(
            "humidity_curve", self.humidity_curve, self.run_start_us, self.run_end_us
        )
        for t, v in self.soil_curve:
            if not 0 <= v <= ADC_MAX:
                raise ProfileError(f"soil curve value {v} at t={t}us outside 0..{ADC_MAX}")

    def check_window(self, t_us: int) -> None:
        if not self.run_start_us <= t_us <= self.run_end_us:
            raise OutOfWindow(
                f"t={t_us}us outside run window "
                f"[{self.run_start_us}, {self.run_end_us}]"
            )

    def sample_instants(self) -> list[int]:
        """All scheduled sample times within the run window, ascending."""
        interval = self.sample_interval_us
        wall_start = self.run_start_us + self.clock_offset_us
        first_wall = -(-wall_start // interval) * interval
        out = []
        t = first_wall - self.clock_offset_us
        while t <= self.run_end_us:
            if t >= self.run_start_us:
                out.append(t)
            t += interval
        return out

    def is_sample_instant(self, t_us: int) -> bool:
        if not self.run_start_us <= t_us <= self.run_end_us:
            return False
        return (t_us + self.clock_offset_us) % self.sample_interval_us == 0


# -- Readings ----------------------------------------------------------------


@dataclass(frozen=True)
class FlameReading:
    adc: int
    t_us: int


@dataclass(frozen=True)
class SoilReading:
    adc: int
    t_us: int


@dataclass(frozen=True)
class DhtReading:
    temp_c: int
    humidity_pct: int
    t_us: int


def sample_flame(profile: ScenarioProfile, t_us: int) -> FlameReading:
    """Flame ADC at t: the covering window's peak value, else 0."""
    profile.check_window(t_us)
    for window in profile.flame_windows:
        if window.covers(t_us):
            return FlameReading(adc=window.peak_adc, t_us=t_us)
    return FlameReading(adc=0, t_us=t_us)


def sample_soil(profile: ScenarioProfile, t_us: int) -> SoilReading:
    """Soil ADC at t: interpolated curve value, rounded and clamped to 10 bits.

    Higher values mean wetter soil.
    """
    profile.check_window(t_us)
    value = round_half_up(interpolate(profile.soil_curve, t_us))
    return SoilReading(adc=min(max(value, 0), ADC_MAX), t_us=t_us)


class DhtNoise:
    """Seeded, order-independent error source for the temp/humidity sensor."""

    def __init__(self, seed: int, node_id: str = "node3"):
        self.seed = seed
        self.node_id = node_id

    def draw(self, t_us: int) -> tuple[int, int]:
        """Errors in {-1, 0, +1} for (temperature, humidity) at time t."""
        digest = hashlib.sha256(
            f"{self.seed}:{self.node_id}:{t_us}".encode()
        ).digest()
        n = int.from_bytes(digest[:8], "big")
        return (n % 3) - 1, ((n // 3) % 3) - 1


def sample_dht11(profile: ScenarioProfile, t_us: int, noise: DhtNoise) -> DhtReading:
    """Temperature/humidity at t: rounded truth plus seeded +/-1 error, clamped
    to the sensor's operating range."""
    profile.check_window(t_us)
    temp_err, hum_err = noise.draw(t_us)
    temp = round_half_up(interpolate(profile.temp_curve, t_us)) + temp_err
    hum = round_half_up(interpolate(profile.humidity_curve, t_us)) + hum_err
    return DhtReading(
        temp_c=min(max(temp, DHT_TEMP_MIN_C), DHT_TEMP_MAX_C),
        humidity_pct=min(max(hum, DHT_HUMIDITY_MIN_PCT), DHT_HUMIDITY_MAX_PCT),
        t_us=t_us,
    )

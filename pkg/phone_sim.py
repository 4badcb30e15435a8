"""
Simulated PhoneAdapter target system
Sensors (GPS, Bluetooth, calendar), effectors (ringtone volume, vibration),
per-device health and fault injection
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Union

from config import CLOCK_START, MEETING_START, MEETING_END, INITIAL_VOLUME, INITIAL_VIBRATION

logger = logging.getLogger("adapter.phone")

MINUTES_PER_DAY = 1440

# Distinguished Bluetooth peers used by the contextual rules
CAR_HANDSFREE = "car_handsfree"
HOME_PC = "home_pc"
OFFICE_PC = "office_pc"


class PhoneError(Exception):
    """Base class for simulator errors"""


class UnknownDevice(PhoneError, ValueError):
    pass


class DisconnectNotConnected(PhoneError, LookupError):
    pass


class EffectorFailed(PhoneError):
    def __init__(self, effector: "Device"):
        super().__init__(f"effector {effector.value} has failed")
        self.effector = effector


class VolumeOutOfRange(PhoneError, ValueError):
    pass


class Sensor(str, Enum):
    GPS = "gps"
    BLUETOOTH = "bluetooth"
    CALENDAR = "calendar"


class Device(str, Enum):
    """Anything that can fail: two sensors and two effectors"""
    GPS = "gps"
    BLUETOOTH = "bluetooth"
    RINGTONE = "ringtone"
    VIBRATION = "vibration"

    @property
    def is_sensor(self) -> bool:
        return self in (Device.GPS, Device.BLUETOOTH)


class Location(str, Enum):
    HOME = "home"
    OFFICE = "office"
    OTHER = "other"
    UNKNOWN = "unknown"


class Vibration(str, Enum):
    ON = "ON"
    OFF = "OFF"


ALL_SENSORS: FrozenSet[Sensor] = frozenset(Sensor)


@dataclass(frozen=True)
class GpsReading:
    valid: bool = False
    location: Location = Location.UNKNOWN
    speed: float = 0.0
    lat: float = 0.0
    lon: float = 0.0

    def __post_init__(self):
        for name in ("speed", "lat", "lon"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if self.speed < 0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")


# What a failed (or unused) GPS reports: no fix at latitude 0.0 / longitude 0.0
GPS_SENTINEL = GpsReading()


def _check_minute(name: str, value: int) -> None:
    if not 0 <= value < MINUTES_PER_DAY:
        raise ValueError(f"{name} must be within 0..{MINUTES_PER_DAY - 1}, got {value}")


@dataclass(frozen=True)
class SensorSnapshot:
    """One reading of every sensor and the calendar probe"""
    gps: GpsReading = GPS_SENTINEL
    bluetooth: FrozenSet[str] = frozenset()
    time: int = 0
    meeting_start: int = MINUTES_PER_DAY - 1
    meeting_end: int = MINUTES_PER_DAY - 1

    def __post_init__(self):
        object.__setattr__(self, "bluetooth", frozenset(self.bluetooth))
        _check_minute("time", self.time)
        _check_minute("meeting_start", self.meeting_start)
        _check_minute("meeting_end", self.meeting_end)

    @property
    def bt_count(self) -> int:
        return len(self.bluetooth)


@dataclass(frozen=True)
class EffectorState:
    volume: int = INITIAL_VOLUME
    vibration: Vibration = Vibration(INITIAL_VIBRATION)

    def __post_init__(self):
        if not 0 <= self.volume <= 100:
            raise VolumeOutOfRange(f"volume must be within 0..100, got {self.volume}")
        object.__setattr__(self, "vibration", Vibration(self.vibration))


@dataclass(frozen=True)
class HealthState:
    gps_ok: bool = True
    bt_ok: bool = True
    ringtone_ok: bool = True
    vibration_ok: bool = True

    def is_ok(self, device: Device) -> bool:
        return getattr(self, _HEALTH_FIELDS[device])

    def with_device(self, device: Device, ok: bool) -> "HealthState":
        return replace(self, **{_HEALTH_FIELDS[device]: ok})

    def changed_devices(self, other: "HealthState") -> List[Device]:
        """Devices whose flag differs between self and other, in Device order"""
        return [d for d in Device if self.is_ok(d) != other.is_ok(d)]


_HEALTH_FIELDS = {
    Device.GPS: "gps_ok",
    Device.BLUETOOTH: "bt_ok",
    Device.RINGTONE: "ringtone_ok",
    Device.VIBRATION: "vibration_ok",
}


# ============== INJECTED EVENTS ==============

@dataclass(frozen=True)
class GpsFix:
    valid: bool
    location: Location
    speed: float
    lat: float
    lon: float


@dataclass(frozen=True)
class BtConnect:
    device: str


@dataclass(frozen=True)
class BtDisconnect:
    device: str


@dataclass(frozen=True)
class ClockSet:
    time: int


@dataclass(frozen=True)
class CalendarSet:
    meeting_start: int
    meeting_end: int


@dataclass(frozen=True)
class Fail:
    device: Union[Device, str]


@dataclass(frozen=True)
class Restore:
    device: Union[Device, str]


InjectedEvent = Union[GpsFix, BtConnect, BtDisconnect, ClockSet, CalendarSet, Fail, Restore]


def as_device(name: Union[Device, str]) -> Device:
    try:
        return Device(name)
    except ValueError:
        raise UnknownDevice(f"unknown device: {name!r}") from None


@dataclass(frozen=True)
class EffectorCall:
    """One recorded set_volume / set_vibration invocation"""
    effector: Device
    value: Union[int, Vibration]
    accepted: bool
    caller: str = ""


class PhoneSimulator:
    """
    Single-owner mutable phone model driven by the scenario schedule

    Readings are kept even while a sensor is failed; a failed sensor only
    changes what read_sensors reports.
    """

    def __init__(
        self,
        clock: int = CLOCK_START,
        meeting_start: int = MEETING_START,
        meeting_end: int = MEETING_END,
    ):
        _check_minute("clock", clock)
        _check_minute("meeting_start", meeting_start)
        _check_minute("meeting_end", meeting_end)
        self._gps = GPS_SENTINEL
        self._bluetooth: set = set()
        self._clock = clock
        self._meeting = (meeting_start, meeting_end)
        self._health = HealthState()
        self._effectors = EffectorState()

        self._access: Dict[Sensor, int] = {s: 0 for s in Sensor}
        self.effector_calls: List[EffectorCall] = []

    # ============== FAULT INJECTION ==============

    def apply_event(self, event: InjectedEvent) -> None:
        """Apply one scripted event to the simulated phone"""
        if isinstance(event, GpsFix):
            self._gps = GpsReading(
                valid=event.valid,
                location=Location(event.location),
                speed=event.speed,
                lat=event.lat,
                lon=event.lon,
            )
        elif isinstance(event, BtConnect):
            self._bluetooth.add(event.device)
        elif isinstance(event, BtDisconnect):
            if event.device not in self._bluetooth:
                raise DisconnectNotConnected(f"{event.device} is not connected")
            self._bluetooth.discard(event.device)
        elif isinstance(event, ClockSet):
            _check_minute("clock", event.time)
            self._clock = event.time
        elif isinstance(event, CalendarSet):
            _check_minute("meeting_start", event.meeting_start)
            _check_minute("meeting_end", event.meeting_end)
            self._meeting = (event.meeting_start, event.meeting_end)
        elif isinstance(event, (Fail, Restore)):
            device = as_device(event.device)
            ok = isinstance(event, Restore)
            if self._health.is_ok(device) != ok:
                logger.info(f"[Phone] {device.value} {'restored' if ok else 'failed'}")
            self._health = self._health.with_device(device, ok)
        else:
            raise TypeError(f"not an injected event: {event!r}")

    # ============== SENSORS ==============

    def read_sensors(self, mask: Iterable[Sensor] = ALL_SENSORS) -> SensorSnapshot:
        """
        Read the sensors named in mask

        Sensors outside the mask read as their sentinels and are not touched,
        so their access counters stay unchanged.
        """
        mask = frozenset(Sensor(s) for s in mask)
        for sensor in mask:
            self._access[sensor] += 1

        gps = GPS_SENTINEL
        if Sensor.GPS in mask and self._health.gps_ok:
            gps = self._gps

        bluetooth: FrozenSet[str] = frozenset()
        if Sensor.BLUETOOTH in mask and self._health.bt_ok:
            bluetooth = frozenset(self._bluetooth)

        if Sensor.CALENDAR in mask:
            return SensorSnapshot(gps, bluetooth, self._clock, *self._meeting)
        return SensorSnapshot(gps=gps, bluetooth=bluetooth)

    def access_count(self, sensor: Sensor) -> int:
        return self._access[Sensor(sensor)]

    def access_counts(self) -> Dict[Sensor, int]:
        return dict(self._access)

    # ============== EFFECTORS ==============

    @property
    def effectors(self) -> EffectorState:
        return self._effectors

    def set_volume(self, volume: int, caller: str = "") -> None:
        if not 0 <= volume <= 100:
            raise VolumeOutOfRange(f"volume must be within 0..100, got {volume}")
        accepted = self._health.ringtone_ok
        self.effector_calls.append(EffectorCall(Device.RINGTONE, volume, accepted, caller))
        if not accepted:
            raise EffectorFailed(Device.RINGTONE)
        self._effectors = replace(self._effectors, volume=volume)

    def set_vibration(self, vibration: Union[Vibration, str], caller: str = "") -> None:
        vibration = Vibration(vibration)
        accepted = self._health.vibration_ok
        self.effector_calls.append(EffectorCall(Device.VIBRATION, vibration, accepted, caller))
        if not accepted:
            raise EffectorFailed(Device.VIBRATION)
        self._effectors = replace(self._effectors, vibration=vibration)

    # ============== HEALTH ==============

    def probe_health(self) -> HealthState:
        """Ground-truth operational status of every device"""
        return self._health

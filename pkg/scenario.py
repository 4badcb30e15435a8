"""
Scenario runner
Scenario files, the deterministic tick schedule and the trace stream
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from bus import Message, MessageBus, TOPIC_NEW_CONTEXT, TOPIC_RULE_CHANGE, TOPIC_TICK
from config import DEFAULT_TICKS, FUZZ_SEED, FUZZ_TICKS, MEETING_END, MEETING_START
from knowledge import ChangeNotification, EFFECTOR_STATE, ENSEMBLE_CONFIG, FAILURES_LATEST, Knowledge
from microcontrollers import (
    KNOWLEDGE_DESCRIPTOR, Ensemble, EnsembleConfig, FailureRecord, NewContext, RuleChange, Stage, TickSignal,
)
from afsm import INITIAL_STATE
from phone_sim import (
    CAR_HANDSFREE, HOME_PC, OFFICE_PC, MINUTES_PER_DAY,
    BtConnect, BtDisconnect, CalendarSet, ClockSet, Device, EffectorState, Fail, GpsFix, InjectedEvent,
    Location, PhoneSimulator, Restore, as_device,
)

logger = logging.getLogger("adapter.scenario")

# Exit codes
EXIT_OK = 0
EXIT_SCENARIO_ERROR = 1
EXIT_FAULT = 2
EXIT_CONFLICTS = 3


class ScenarioParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


@dataclass(frozen=True)
class ScheduledEvent:
    tick: int
    event: InjectedEvent
    line: int = 0


@dataclass
class Scenario:
    name: str
    ticks: int
    events: List[ScheduledEvent] = field(default_factory=list)

    def events_at(self, tick: int) -> List[InjectedEvent]:
        return [e.event for e in self.events if e.tick == tick]

    @property
    def last_event_tick(self) -> Optional[int]:
        return self.events[-1].tick if self.events else None


# ============== SCENARIO FILES ==============

_ARITY = {
    "gps_fix": 5,
    "bt_connect": 1,
    "bt_disconnect": 1,
    "clock": 1,
    "calendar": 2,
    "fail": 1,
    "restore": 1,
}


def _minute(text: str) -> int:
    value = int(text)
    if not 0 <= value < MINUTES_PER_DAY:
        raise ValueError(f"minute of day must be within 0..{MINUTES_PER_DAY - 1}, got {value}")
    return value


def _finite(name: str, text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be a finite number, got {text}")
    return value


def _parse_event(kind: str, args: List[str], number: int) -> InjectedEvent:
    arity = _ARITY.get(kind)
    if arity is None:
        raise ScenarioParseError(number, f"unknown event {kind!r}")
    if len(args) != arity:
        raise ScenarioParseError(number, f"{kind} takes {arity} argument(s), got {len(args)}")

    try:
        if kind == "gps_fix":
            validity, location, speed, lat, lon = args
            if validity not in ("valid", "invalid"):
                raise ValueError(f"expected valid or invalid, got {validity!r}")
            speed_kmh, lat_deg, lon_deg = _finite("speed", speed), _finite("lat", lat), _finite("lon", lon)
            if speed_kmh < 0:
                raise ValueError(f"speed must be >= 0, got {speed}")
            return GpsFix(validity == "valid", Location(location), speed_kmh, lat_deg, lon_deg)
        if kind == "bt_connect":
            return BtConnect(args[0])
        if kind == "bt_disconnect":
            return BtDisconnect(args[0])
        if kind == "clock":
            return ClockSet(_minute(args[0]))
        if kind == "calendar":
            return CalendarSet(_minute(args[0]), _minute(args[1]))
        if kind == "fail":
            return Fail(as_device(args[0]))
        return Restore(as_device(args[0]))
    except ValueError as e:
        raise ScenarioParseError(number, str(e)) from None


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """
    Parse a scenario file

    Args:
        text: File contents, one header or event per line
        name: Name used when the file has no 'name' header

    Returns:
        A validated Scenario with events sorted by tick
    """
    ticks: Optional[int] = None
    events: List[ScheduledEvent] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()

        if tokens[0] == "ticks":
            if ticks is not None:
                raise ScenarioParseError(number, "duplicate ticks header")
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise ScenarioParseError(number, "expected 'ticks <N>' with N >= 1")
            ticks = int(tokens[1])
            continue
        if tokens[0] == "name":
            name = line.split(None, 1)[1] if len(tokens) > 1 else name
            continue

        try:
            tick = int(tokens[0])
        except ValueError:
            raise ScenarioParseError(number, f"expected a tick number, got {tokens[0]!r}") from None
        if len(tokens) < 2:
            raise ScenarioParseError(number, "missing event")
        events.append(ScheduledEvent(tick, _parse_event(tokens[1], tokens[2:], number), number))

    scenario = Scenario(name, ticks if ticks is not None else DEFAULT_TICKS,
                        sorted(events, key=lambda e: e.tick))
    validate_scenario(scenario)
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), name=path.stem)


def validate_scenario(scenario: Scenario) -> None:
    """Tick range and health-event consistency, so every Fail/Restore is observable"""
    healthy: Dict[Device, bool] = {d: True for d in Device}
    seen: Set[Tuple[int, Device]] = set()
    for item in scenario.events:
        if not 0 <= item.tick < scenario.ticks:
            raise ScenarioParseError(item.line, f"tick {item.tick} outside 0..{scenario.ticks - 1}")
        if not isinstance(item.event, (Fail, Restore)):
            continue

        device = as_device(item.event.device)
        if (item.tick, device) in seen:
            raise ScenarioParseError(item.line, f"second health event for {device.value} in tick {item.tick}")
        seen.add((item.tick, device))

        failing = isinstance(item.event, Fail)
        if failing and not healthy[device]:
            raise ScenarioParseError(item.line, f"{device.value} is already failed")
        if not failing and healthy[device]:
            raise ScenarioParseError(item.line, f"{device.value} is not failed")
        healthy[device] = not failing


def with_ticks(scenario: Scenario, ticks: int) -> Scenario:
    """Override the tick count, dropping events that no longer fit"""
    kept = [e for e in scenario.events if e.tick < ticks]
    if len(kept) < len(scenario.events):
        logger.warning(f"[Runner] --ticks {ticks} drops {len(scenario.events) - len(kept)} event(s)")
    return replace(scenario, ticks=ticks, events=kept)


# ============== RANDOM SCENARIOS ==============

RANDOM_PEERS = (CAR_HANDSFREE, HOME_PC, OFFICE_PC, "peer_1", "peer_2", "peer_3")
RANDOM_LOCATIONS = (Location.HOME, Location.OFFICE, Location.OTHER)
RANDOM_SPEEDS = (0, 3, 6, 40, 71, 90)
RANDOM_CLOCKS = (540, 600, 630, 660, 700)


def _pick(rng: np.random.Generator, options: Sequence):
    return options[int(rng.integers(len(options)))]


def random_scenario(
    seed: int = FUZZ_SEED,
    ticks: int = FUZZ_TICKS,
    health_devices: Sequence[Device] = tuple(Device),
) -> Scenario:
    """
    Generate a valid scenario from a seed

    Disconnects only name connected peers and each device alternates between
    fail and restore, at most one health event per tick.

    Args:
        seed: numpy generator seed
        ticks: Scenario length
        health_devices: Devices allowed to fail and recover
    """
    rng = np.random.default_rng(seed)
    connected: List[str] = []
    failed: Set[Device] = set()
    events = [ScheduledEvent(0, CalendarSet(MEETING_START, MEETING_END))]

    for tick in range(ticks):
        health_done = False
        for _ in range(int(rng.integers(0, 3))):
            kind = _pick(rng, ("gps_fix", "bt_connect", "bt_disconnect", "clock", "health"))
            event: Optional[InjectedEvent] = None

            if kind == "gps_fix":
                event = GpsFix(
                    valid=bool(rng.random() < 0.8),
                    location=_pick(rng, RANDOM_LOCATIONS),
                    speed=float(_pick(rng, RANDOM_SPEEDS)),
                    lat=round(float(rng.uniform(-90, 90)), 4),
                    lon=round(float(rng.uniform(-180, 180)), 4),
                )
            elif kind == "bt_connect":
                free = [p for p in RANDOM_PEERS if p not in connected]
                if free:
                    event = BtConnect(_pick(rng, free))
                    connected.append(event.device)
            elif kind == "bt_disconnect":
                if connected:
                    event = BtDisconnect(_pick(rng, connected))
                    connected.remove(event.device)
            elif kind == "clock":
                event = ClockSet(int(_pick(rng, RANDOM_CLOCKS)))
            elif health_devices and not health_done:
                device = _pick(rng, tuple(health_devices))
                if device in failed:
                    event = Restore(device)
                    failed.discard(device)
                else:
                    event = Fail(device)
                    failed.add(device)
                health_done = True

            if event is not None:
                events.append(ScheduledEvent(tick, event))

    scenario = Scenario(f"random-{seed}", ticks, events)
    validate_scenario(scenario)
    return scenario


# ============== TRACE ==============

class TraceKind(str, Enum):
    CONTEXT_CHANGE = "context_change"
    CONFLICT = "conflict"
    EFFECTOR_SET = "effector_set"
    FAILURE = "failure"
    RECONFIG = "reconfig"
    RULE_CHANGE = "rule_change"
    FAULT = "fault"


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    kind: TraceKind
    detail: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def of(cls, tick: int, kind: TraceKind, *fields: Tuple[str, object]) -> "TraceRecord":
        return cls(tick, kind, tuple((k, str(v)) for k, v in fields))

    def get(self, name: str) -> Optional[str]:
        return dict(self.detail).get(name)

    def __str__(self) -> str:
        parts = [str(self.tick), self.kind.value]
        parts.extend(f"{k}={v}" for k, v in self.detail)
        return " ".join(parts)


class TraceRecorder:
    """
    Turns Knowledge commits and bus traffic into trace records

    Failures, effector writes and reconfigurations come from Knowledge watches;
    context changes, conflicts and rule changes are seen on the bus.
    """

    def __init__(self, knowledge: Knowledge, bus: MessageBus):
        self.records: List[TraceRecord] = []
        self._knowledge = knowledge
        self._config: Optional[EnsembleConfig] = knowledge.value(ENSEMBLE_CONFIG)
        self._handles = [
            knowledge.watch(key, self._on_change) for key in (FAILURES_LATEST, EFFECTOR_STATE, ENSEMBLE_CONFIG)
        ]
        bus.add_tap(self._on_message)

    def close(self) -> None:
        for handle in self._handles:
            self._knowledge.unwatch(handle)
        self._handles = []

    def fault(self, tick: int, error: BaseException) -> None:
        cause = error.__cause__ or error
        self.records.append(TraceRecord.of(tick, TraceKind.FAULT, ("error", type(cause).__name__)))

    def _on_change(self, notification: ChangeNotification) -> None:
        entry = notification.entry
        value, tick = entry.value, entry.tick

        if notification.key == FAILURES_LATEST and isinstance(value, FailureRecord):
            self.records.append(TraceRecord.of(
                value.tick, TraceKind.FAILURE, ("device", value.device.value), ("status", value.status.value),
            ))
        elif notification.key == EFFECTOR_STATE and isinstance(value, EffectorState):
            self.records.append(TraceRecord.of(
                tick, TraceKind.EFFECTOR_SET, ("volume", value.volume), ("vibration", value.vibration.value),
            ))
        elif notification.key == ENSEMBLE_CONFIG and isinstance(value, EnsembleConfig):
            self._on_config(value, tick)

    def _on_config(self, config: EnsembleConfig, tick: int) -> None:
        previous, self._config = self._config, config
        if previous is None:
            return
        rule = config.rule or "-"
        if previous.active_cm != config.active_cm:
            self.records.append(TraceRecord.of(
                tick, TraceKind.RECONFIG, ("rule", rule), ("role", "ContextManager"),
                ("old", previous.active_cm.value), ("new", config.active_cm.value),
            ))
        if previous.active_am != config.active_am:
            self.records.append(TraceRecord.of(
                tick, TraceKind.RECONFIG, ("rule", rule), ("role", "AdaptationManager"),
                ("old", previous.active_am.value), ("new", config.active_am.value),
            ))

    def _on_message(self, message: Message) -> None:
        payload = message.payload
        if message.topic == TOPIC_NEW_CONTEXT and isinstance(payload, NewContext):
            self.records.append(TraceRecord.of(
                payload.tick, TraceKind.CONTEXT_CHANGE,
                ("rule", payload.rule),
                ("from", payload.old_state.value),
                ("to", payload.new_state.value),
                ("volume", payload.output.volume),
                ("vibration", payload.output.vibration.value),
            ))
            if payload.conflicts:
                self.records.append(TraceRecord.of(
                    payload.tick, TraceKind.CONFLICT,
                    ("state", payload.old_state.value),
                    ("fired", payload.rule),
                    ("enabled", ",".join((payload.rule,) + payload.conflicts)),
                ))
        elif message.topic == TOPIC_RULE_CHANGE and isinstance(payload, RuleChange):
            self.records.append(TraceRecord.of(
                payload.tick, TraceKind.RULE_CHANGE,
                ("from", payload.from_state.value), ("to", INITIAL_STATE.value), ("reason", payload.reason or "-"),
            ))


# ============== RUNNER ==============

@dataclass(frozen=True)
class RunOptions:
    ticks: Optional[int] = None
    static: bool = False     # no MetaController: initial variants run whatever fails
    recreate: bool = False   # destroy and recreate the active CM and AM before every tick


@dataclass
class RunResult:
    scenario: Scenario
    records: List[TraceRecord]
    exit_code: int
    knowledge: Knowledge
    bus: MessageBus
    phone: PhoneSimulator
    ensemble: Ensemble

    @property
    def lines(self) -> List[str]:
        return [str(r) for r in self.records]

    @property
    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    def of_kind(self, kind: TraceKind) -> List[TraceRecord]:
        return [r for r in self.records if r.kind == kind]


def run_scenario(scenario: Scenario, options: Optional[RunOptions] = None) -> RunResult:
    """
    Drive the ensemble through a scenario

    Per tick: apply the tick's events, publish the monitor signal (failure
    detection, reconfiguration, rule change), then the analyze signal
    (context generation and adaptation).
    """
    options = options or RunOptions()
    if options.ticks is not None:
        scenario = with_ticks(scenario, options.ticks)

    knowledge = Knowledge()
    bus = MessageBus()
    phone = PhoneSimulator()
    ensemble = Ensemble(knowledge, bus, phone, static=options.static)
    ensemble.deploy()
    recorder = TraceRecorder(knowledge, bus)

    schedule: Dict[int, List[InjectedEvent]] = defaultdict(list)
    for item in scenario.events:
        schedule[item.tick].append(item.event)

    # Ticks enter the bus through the permanent Knowledge controller
    sender = KNOWLEDGE_DESCRIPTOR.id
    exit_code = EXIT_OK
    tick = 0
    try:
        for tick in range(scenario.ticks):
            if options.recreate:
                ensemble.recreate_active()
            for event in schedule.get(tick, ()):
                phone.apply_event(event)
            bus.publish(TOPIC_TICK, TickSignal(tick, Stage.MONITOR), sender=sender)
            bus.publish(TOPIC_TICK, TickSignal(tick, Stage.ANALYZE), sender=sender)
    except Exception as e:
        logger.error(f"[Runner] Fault at tick {tick}: {e}", exc_info=True)
        recorder.fault(tick, e)
        exit_code = EXIT_FAULT
    finally:
        recorder.close()

    counts = ", ".join(f"{sensor.value}={n}" for sensor, n in phone.access_counts().items())
    config = ensemble.config
    logger.info(f"[Runner] {scenario.name}: {scenario.ticks} ticks, {len(recorder.records)} records")
    logger.info(f"[Runner] Sensor reads: {counts}")
    logger.info(f"[Runner] Final ensemble: {config.active_cm.value} + {config.active_am.value}")

    return RunResult(scenario, recorder.records, exit_code, knowledge, bus, phone, ensemble)

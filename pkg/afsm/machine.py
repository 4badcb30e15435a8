"""
A-FSM engine: enabled rules, deterministic stepping, reachability and
grid-based conflict detection
"""

import logging
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, List, Set, Tuple

from phone_sim import (
    CAR_HANDSFREE, HOME_PC, OFFICE_PC, GpsReading, Location, SensorSnapshot,
)
from .model import AFSMDef, ContextState, Rule, StepResult

logger = logging.getLogger("adapter.afsm")


def enabled_rules(m: AFSMDef, state: ContextState, s: SensorSnapshot) -> List[Rule]:
    """Every rule leaving state whose predicate holds, in table order"""
    return [r for r in m.rules if state in r.from_states and m.predicate_of(r).evaluate(s)]


def step(m: AFSMDef, state: ContextState, s: SensorSnapshot) -> StepResult:
    """
    Fire at most one rule

    The first enabled rule in table order wins; the other enabled rules are
    reported as conflicts.
    """
    enabled = enabled_rules(m, state, s)
    if not enabled:
        return StepResult(new_state=state)
    fired, *rest = enabled
    if rest:
        logger.debug(f"[AFSM] {m.name}/{state.value}: {fired.id} fired over {[r.id for r in rest]}")
    return StepResult(
        new_state=fired.to,
        fired=fired.id,
        output=fired.output,
        conflicts=tuple(r.id for r in rest),
    )


def reachable_states(m: AFSMDef) -> Set[ContextState]:
    """States reachable from the initial state, ignoring predicates"""
    seen = {m.initial}
    frontier = [m.initial]
    while frontier:
        state = frontier.pop()
        for rule in m.rules:
            if state in rule.from_states and rule.to not in seen:
                seen.add(rule.to)
                frontier.append(rule.to)
    return seen


# ============== CONFLICT DETECTION ==============

# One value on each side of every threshold the rule tables use
GRID_LOCATIONS = (Location.HOME, Location.OFFICE, Location.OTHER)
GRID_SPEEDS = (0, 6, 71)
GRID_DEVICES = (CAR_HANDSFREE, HOME_PC, OFFICE_PC)
GRID_EXTRA_PEERS = (0, 3)
GRID_MEETING = (600, 660)
GRID_TIMES = (540, 630, 700)  # before, during, after the meeting


@dataclass(frozen=True)
class Conflict:
    state: ContextState
    rules: Tuple[str, ...]
    witness: SensorSnapshot

    def __str__(self) -> str:
        return f"{self.state.value}: {{{', '.join(self.rules)}}} witness {describe_snapshot(self.witness)}"


def _device_subsets() -> List[Tuple[str, ...]]:
    subsets: List[Tuple[str, ...]] = []
    for size in range(len(GRID_DEVICES) + 1):
        subsets.extend(combinations(GRID_DEVICES, size))
    return subsets


def snapshot_grid() -> Iterator[SensorSnapshot]:
    """
    Finite snapshot grid covering every threshold of the rule tables

    bt_count follows from the device set, so the count axis is realised by
    adding 0 or 3 anonymous peers to each subset of the distinguished devices.
    """
    start, end = GRID_MEETING
    for valid, location, speed, subset, extra, time in product(
        (False, True), GRID_LOCATIONS, GRID_SPEEDS, _device_subsets(), GRID_EXTRA_PEERS, GRID_TIMES,
    ):
        peers = tuple(f"peer_{i}" for i in range(1, extra + 1))
        yield SensorSnapshot(
            gps=GpsReading(valid=valid, location=location, speed=speed),
            bluetooth=frozenset(subset + peers),
            time=time,
            meeting_start=start,
            meeting_end=end,
        )


def detect_conflicts(m: AFSMDef) -> List[Conflict]:
    """Every (state, enabled set) with two or more rules, with its first witness"""
    found = {}
    for snapshot in snapshot_grid():
        for state in ContextState:
            enabled = tuple(r.id for r in enabled_rules(m, state, snapshot))
            if len(enabled) >= 2 and (state, enabled) not in found:
                found[(state, enabled)] = Conflict(state, enabled, snapshot)
    states = list(ContextState)
    return sorted(found.values(), key=lambda c: (states.index(c.state), c.rules))


def describe_snapshot(s: SensorSnapshot) -> str:
    gps = f"valid,{s.gps.location.value},{s.gps.speed:g}" if s.gps.valid else "invalid"
    bt = ",".join(sorted(s.bluetooth)) or "-"
    return f"gps={gps} bt={bt} time={s.time} meeting={s.meeting_start}-{s.meeting_end}"

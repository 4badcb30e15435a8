"""
Contextual rule tables for the PhoneAdapter ContextManagers

TABLE_ALL_SENSORS is the full sixteen-rule machine; every degraded machine is
derived from it by build_variant. TABLE_NO_GPS is kept as an independent
transcription so the derivation can be checked against it.
"""

from functools import lru_cache
from typing import FrozenSet, List, Optional

from phone_sim import CAR_HANDSFREE, HOME_PC, OFFICE_PC, Location, Sensor, Vibration
from .model import AFSMDef, ContextState as S, Output, Rule
from .predicates import (
    And, BtConnected, BtCountGte, GpsIsValid, GpsLocationIs, GpsSpeedGt, Not, Or,
    Predicate, RuleNegation, TimeGte, TimeRef, ATOM_TYPES,
)

ON, OFF = Vibration.ON, Vibration.OFF


def _rule(id, name, from_states, to, predicate, volume, vibration) -> Rule:
    return Rule(id, name, frozenset(from_states), to, predicate, Output(volume, vibration))


TABLE_ALL_SENSORS = AFSMDef("AllSensors", (
    _rule("a", "ActivateOutdoor", [S.GENERAL], S.OUTDOOR,
          And((GpsIsValid(), Not(GpsLocationIs(Location.HOME)), Not(GpsLocationIs(Location.OFFICE)))),
          100, OFF),
    _rule("b", "DesactivateOutdoor", [S.OUTDOOR], S.GENERAL, RuleNegation("ActivateOutdoor"), 50, OFF),
    _rule("c", "ActivateJogging", [S.OUTDOOR], S.JOGGING, And((GpsIsValid(), GpsSpeedGt(5))), 25, OFF),
    _rule("d", "DesactivateJogging", [S.JOGGING], S.OUTDOOR, RuleNegation("ActivateJogging"), 100, OFF),
    _rule("e", "ActivateDriving", [S.GENERAL, S.HOME, S.OFFICE, S.OUTDOOR], S.DRIVING,
          BtConnected(CAR_HANDSFREE), 75, OFF),
    _rule("f", "DesactivateDriving", [S.DRIVING], S.GENERAL, RuleNegation("ActivateDriving"), 50, OFF),
    _rule("g", "ActivateDrivingFast", [S.DRIVING], S.DRIVING_FAST, And((GpsIsValid(), GpsSpeedGt(70))), 0, OFF),
    _rule("h", "DesactivateDrivingFast", [S.DRIVING_FAST], S.DRIVING,
          RuleNegation("ActivateDrivingFast"), 75, OFF),
    _rule("i", "ActivateHome", [S.GENERAL], S.HOME,
          Or((BtConnected(HOME_PC), And((GpsIsValid(), GpsLocationIs(Location.HOME))))), 100, OFF),
    _rule("j", "DesactivateHome", [S.HOME], S.GENERAL, RuleNegation("ActivateHome"), 50, OFF),
    _rule("k", "ActivateOffice", [S.GENERAL], S.OFFICE,
          Or((BtConnected(OFFICE_PC), And((GpsIsValid(), GpsLocationIs(Location.OFFICE))))), 0, ON),
    _rule("l", "DesactivateOffice", [S.OFFICE], S.GENERAL, RuleNegation("ActivateOffice"), 50, OFF),
    _rule("m", "ActivateMeeting", [S.OFFICE], S.MEETING,
          And((TimeGte(TimeRef.MEETING_START), BtCountGte(3))), 0, OFF),
    # Same settings as entering the Office through rule k
    _rule("n", "DesactivateMeeting", [S.MEETING], S.OFFICE, TimeGte(TimeRef.MEETING_END), 0, ON),
    _rule("o", "ActivateSync", [S.GENERAL], S.SYNC, Or((BtConnected(HOME_PC), BtConnected(OFFICE_PC))), 100, OFF),
    _rule("p", "DesactivateSync", [S.SYNC], S.GENERAL, RuleNegation("ActivateSync"), 50, OFF),
))


TABLE_NO_GPS = AFSMDef("NoGPS", (
    _rule("e", "ActivateDriving", [S.GENERAL, S.HOME, S.OFFICE, S.OUTDOOR], S.DRIVING,
          BtConnected(CAR_HANDSFREE), 75, OFF),
    _rule("f", "DesactivateDriving", [S.DRIVING], S.GENERAL, RuleNegation("ActivateDriving"), 50, OFF),
    _rule("i", "ActivateHomeBT", [S.GENERAL], S.HOME, BtConnected(HOME_PC), 100, OFF),
    _rule("j", "DesactivateHomeBT", [S.HOME], S.GENERAL, RuleNegation("ActivateHomeBT"), 50, OFF),
    _rule("k", "ActivateOfficeBT", [S.GENERAL], S.OFFICE, BtConnected(OFFICE_PC), 0, ON),
    _rule("l", "DesactivateOfficeBT", [S.OFFICE], S.GENERAL, RuleNegation("ActivateOfficeBT"), 50, OFF),
    _rule("m", "ActivateMeeting", [S.OFFICE], S.MEETING,
          And((TimeGte(TimeRef.MEETING_START), BtCountGte(3))), 0, OFF),
    _rule("n", "DesactivateMeeting", [S.MEETING], S.OFFICE, TimeGte(TimeRef.MEETING_END), 0, ON),
    _rule("o", "ActivateSync", [S.GENERAL], S.SYNC, Or((BtConnected(HOME_PC), BtConnected(OFFICE_PC))), 100, OFF),
    _rule("p", "DesactivateSync", [S.SYNC], S.GENERAL, RuleNegation("ActivateSync"), 50, OFF),
))

EMBEDDED_TABLES = {
    TABLE_ALL_SENSORS.name: TABLE_ALL_SENSORS,
    TABLE_NO_GPS.name: TABLE_NO_GPS,
}


# ============== DEGRADED VARIANTS ==============

def variant_name(gps_ok: bool, bt_ok: bool) -> str:
    if gps_ok and bt_ok:
        return "AllSensors"
    if bt_ok:
        return "NoGPS"
    if gps_ok:
        return "NoBluetooth"
    return "NoGPSNoBluetooth"


def prune(p: Predicate, failed: FrozenSet[Sensor]) -> Optional[Predicate]:
    """
    Remove what a failed sensor can no longer establish

    Returns None when the predicate needs a failed sensor to hold; inside a
    disjunction only the failed disjuncts are dropped.
    """
    if isinstance(p, ATOM_TYPES):
        return None if p.sensor in failed else p
    if isinstance(p, Not):
        operand = prune(p.operand, failed)
        return None if operand is None or operand != p.operand else p
    if isinstance(p, And):
        operands = [prune(o, failed) for o in p.operands]
        if any(o is None for o in operands):
            return None
        return And(tuple(operands))
    if isinstance(p, Or):
        kept = [o for o in (prune(o, failed) for o in p.operands) if o is not None]
        if not kept:
            return None
        return kept[0] if len(kept) == 1 else Or(tuple(kept))
    # Rule negations are handled by build_variant once their target is known
    return p


@lru_cache(maxsize=None)
def build_variant(gps_ok: bool, bt_ok: bool) -> AFSMDef:
    """
    Derive the A-FSM a ContextManager can run with the given sensors

    A rule survives when its predicate can still hold without the failed
    sensors. A rule that lost a disjunct keeps its id and gets the remaining
    sensor appended to its name (ActivateHome -> ActivateHomeBT); a negation
    of a dropped rule is dropped, a negation of a renamed rule follows the
    rename. Negations are then inlined again by AFSMDef.
    """
    failed = frozenset(
        sensor for sensor, ok in ((Sensor.GPS, gps_ok), (Sensor.BLUETOOTH, bt_ok)) if not ok
    )
    name = variant_name(gps_ok, bt_ok)
    if not failed:
        return TABLE_ALL_SENSORS
    suffix = "BT" if Sensor.GPS in failed else "GPS"

    renamed = {}
    rules: List[Rule] = []
    for rule in TABLE_ALL_SENSORS.rules:
        if isinstance(rule.predicate, RuleNegation):
            target = rule.predicate.rule_name
            if not any(r.name == renamed.get(target, target) for r in rules):
                continue
            if target in renamed:
                rules.append(_copy(rule, rule.name + suffix, RuleNegation(renamed[target])))
            else:
                rules.append(rule)
            continue

        pruned = prune(rule.predicate, failed)
        if pruned is None:
            continue
        if pruned != rule.predicate:
            renamed[rule.name] = rule.name + suffix
            rules.append(_copy(rule, rule.name + suffix, pruned))
        else:
            rules.append(rule)

    return AFSMDef(name, tuple(rules))


def _copy(rule: Rule, name: str, predicate: Predicate) -> Rule:
    return Rule(rule.id, name, rule.from_states, rule.to, predicate, rule.output)

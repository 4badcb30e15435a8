from itertools import product

import pytest

from afsm import ContextState as S, reachable_states
from bus import TOPIC_EFFECTORS_FAILURE, TOPIC_RULE_CHANGE, TOPIC_SENSORS_FAILURE
from knowledge import CONTEXT_STATE, ENSEMBLE_CONFIG
from microcontrollers import (
    META_RULES_AM, META_RULES_CM, AMVariant, CMVariant, all_health_states, config_map, select_adaptation_manager,
    select_context_manager, triggering_rules,
)
from phone_sim import HealthState
from scenario import TraceKind


@pytest.mark.parametrize("gps_ok,bt_ok,expected", [
    (True, True, CMVariant.ALL_SENSORS),
    (False, True, CMVariant.NO_GPS),
    (True, False, CMVariant.NO_BLUETOOTH),
    (False, False, CMVariant.NO_GPS_NO_BLUETOOTH),
])
def test_select_context_manager(gps_ok, bt_ok, expected):
    assert select_context_manager(HealthState(gps_ok=gps_ok, bt_ok=bt_ok)) == expected


@pytest.mark.parametrize("vibration_ok,ringtone_ok,expected", [
    (True, True, AMVariant.ALL_EFFECTORS),
    (True, False, AMVariant.NO_RINGTONE),
    (False, True, AMVariant.NO_VIBRATION),
    (False, False, AMVariant.NO_RINGTONE_NO_VIBRATION),
])
def test_select_adaptation_manager(vibration_ok, ringtone_ok, expected):
    health = HealthState(vibration_ok=vibration_ok, ringtone_ok=ringtone_ok)
    assert select_adaptation_manager(health) == expected


@pytest.mark.parametrize("health", all_health_states(), ids=str)
def test_exactly_one_rule_per_group_triggers(health):
    assert len(triggering_rules(META_RULES_CM, health)) == 1
    assert len(triggering_rules(META_RULES_AM, health)) == 1


def test_rule_ids():
    assert [r.id for r in META_RULES_CM] == list("abcd")
    assert [r.id for r in META_RULES_AM] == list("efgh")


def test_config_map_covers_the_configuration_space():
    table = config_map()
    assert len(table) == 16
    assert {(c.active_cm, c.active_am) for c in table.values()} == set(product(CMVariant, AMVariant))
    assert (table[HealthState()].active_cm, table[HealthState()].active_am) == (
        CMVariant.ALL_SENSORS, AMVariant.ALL_EFFECTORS,
    )
    all_failed = table[HealthState(False, False, False, False)]
    assert (all_failed.active_cm, all_failed.active_am) == (
        CMVariant.NO_GPS_NO_BLUETOOTH, AMVariant.NO_RINGTONE_NO_VIBRATION,
    )


def test_sensor_health_never_changes_adaptation_manager():
    for health in all_health_states():
        assert select_adaptation_manager(health) == select_adaptation_manager(
            HealthState(True, True, health.ringtone_ok, health.vibration_ok)
        )
        assert select_context_manager(health) == select_context_manager(
            HealthState(health.gps_ok, health.bt_ok, True, True)
        )


# ============== RECONFIGURATION ==============

def fail_report(bus, topic, health):
    """Replay a failure report as the FailureManager would send it"""
    bus.publish(topic, health, sender="FailureManager")


def test_gps_failure_swaps_to_no_gps_and_resets_context(ensemble, bus, knowledge, recorder):
    knowledge.put(CONTEXT_STATE, S.DRIVING_FAST, 0)
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=False))

    assert ensemble.active_ids() == ("ContextManagerNoGPS", "AdaptationManagerAllEffectors")
    config = knowledge.value(ENSEMBLE_CONFIG)
    assert (config.active_cm, config.rule) == (CMVariant.NO_GPS, "b")

    kinds = [r.kind for r in recorder.records]
    assert kinds == [TraceKind.RECONFIG, TraceKind.RULE_CHANGE, TraceKind.EFFECTOR_SET]
    assert knowledge.value(CONTEXT_STATE) == S.GENERAL


def test_reachable_state_survives_the_swap(ensemble, bus, knowledge, recorder):
    knowledge.put(CONTEXT_STATE, S.OFFICE, 0)
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=False))

    assert knowledge.value(CONTEXT_STATE) == S.OFFICE
    assert [r.kind for r in recorder.records] == [TraceKind.RECONFIG]


def test_repeated_failure_report_reconfigures_once(ensemble, bus, recorder):
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=False))
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=False))

    reconfigs = [r for r in recorder.records if r.kind == TraceKind.RECONFIG]
    assert len(reconfigs) == 1
    assert str(reconfigs[0]) == "0 reconfig rule=b role=ContextManager old=AllSensors new=NoGPS"


def test_effector_failure_leaves_context_manager_alone(ensemble, bus, knowledge, recorder):
    fail_report(bus, TOPIC_EFFECTORS_FAILURE, HealthState(ringtone_ok=False))

    config = knowledge.value(ENSEMBLE_CONFIG)
    assert (config.active_cm, config.active_am, config.rule) == (CMVariant.ALL_SENSORS, AMVariant.NO_RINGTONE, "f")
    assert ensemble.active_ids() == ("ContextManagerAllSensors", "AdaptationManagerNoRingtone")
    assert [str(r) for r in recorder.records] == [
        "0 reconfig rule=f role=AdaptationManager old=AllEffectors new=NoRingtone",
    ]


@pytest.mark.parametrize("state", list(S))
@pytest.mark.parametrize("gps_ok,bt_ok", [(False, True), (True, False), (False, False)])
def test_context_state_is_reachable_after_reconfiguration(ensemble, bus, knowledge, state, gps_ok, bt_ok):
    knowledge.put(CONTEXT_STATE, state, 0)
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=gps_ok, bt_ok=bt_ok))

    active = knowledge.value(ENSEMBLE_CONFIG).active_cm
    assert knowledge.value(CONTEXT_STATE) in reachable_states(active.afsm)


def test_rule_change_is_only_published_for_unreachable_states(ensemble, bus, knowledge):
    published = []
    bus.add_tap(lambda m: published.append(m) if m.topic == TOPIC_RULE_CHANGE else None)

    knowledge.put(CONTEXT_STATE, S.DRIVING, 0)
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=False))
    assert published == []

    knowledge.put(CONTEXT_STATE, S.MEETING, 0)
    fail_report(bus, TOPIC_SENSORS_FAILURE, HealthState(gps_ok=False, bt_ok=False))
    assert [m.payload.from_state for m in published] == [S.MEETING]
    assert published[0].payload.reason == "d"

from dataclasses import replace

import pytest

from afsm import ContextState as S, reachable_states
from config import DEFAULT_TICKS
from knowledge import CONTEXT_STATE, EFFECTOR_STATE, ENSEMBLE_CONFIG
from microcontrollers import AMVariant, CMVariant
from phone_sim import Device, EffectorState, Fail, Restore, Sensor, Vibration
from scenario import (
    EXIT_FAULT, EXIT_OK, RunOptions, ScenarioParseError, ScheduledEvent, TraceKind, load_scenario, parse_scenario,
    random_scenario, run_scenario, validate_scenario,
)

GOLDEN_SCENARIOS = ["driving", "meeting", "gps_failure", "effector_failure"]
SEEDS = range(100)


# ============== GOLDEN TRACES ==============

@pytest.mark.parametrize("name", GOLDEN_SCENARIOS)
def test_golden_trace(scenario_file, golden, name):
    result = run_scenario(scenario_file(name))
    assert result.exit_code == EXIT_OK
    assert result.text == golden(name)


@pytest.mark.parametrize("name", GOLDEN_SCENARIOS)
def test_runs_are_deterministic(scenario_file, name):
    scenario = scenario_file(name)
    assert run_scenario(scenario).text == run_scenario(scenario).text


@pytest.mark.parametrize("name", GOLDEN_SCENARIOS)
def test_trace_agrees_with_knowledge(scenario_file, name):
    result = run_scenario(scenario_file(name))
    knowledge = result.knowledge

    last_context = result.of_kind(TraceKind.CONTEXT_CHANGE)[-1]
    assert knowledge.value(CONTEXT_STATE).value == last_context.get("to")

    last_set = result.of_kind(TraceKind.EFFECTOR_SET)[-1]
    effectors = knowledge.value(EFFECTOR_STATE)
    assert (str(effectors.volume), effectors.vibration.value) == (last_set.get("volume"), last_set.get("vibration"))
    assert effectors == result.phone.effectors


def test_empty_scenario_stays_in_general():
    result = run_scenario(parse_scenario("ticks 10\n"))
    assert result.exit_code == EXIT_OK
    assert result.of_kind(TraceKind.CONTEXT_CHANGE) == []
    assert result.knowledge.value(CONTEXT_STATE) == S.GENERAL


def test_single_gps_failure_reconfigures_in_its_tick():
    result = run_scenario(parse_scenario("ticks 5\n2 fail gps\n"))
    assert result.lines[:2] == [
        "2 failure device=gps status=failed",
        "2 reconfig rule=b role=ContextManager old=AllSensors new=NoGPS",
    ]
    assert result.ensemble.active_ids()[0] == "ContextManagerNoGPS"


# ============== GPS FAILURE ==============

def test_gps_failure_reconfigures_once(scenario_file):
    result = run_scenario(scenario_file("gps_failure"))
    assert len(result.of_kind(TraceKind.FAILURE)) == 1
    assert len(result.of_kind(TraceKind.RECONFIG)) == 1


def test_no_gps_states_after_the_swap(scenario_file):
    result = run_scenario(scenario_file("gps_failure"))
    swap_tick = result.of_kind(TraceKind.RECONFIG)[0].tick
    gps_only = {S.OUTDOOR.value, S.JOGGING.value, S.DRIVING_FAST.value}

    for record in result.of_kind(TraceKind.CONTEXT_CHANGE):
        if record.tick >= swap_tick:
            assert record.get("to") not in gps_only


def test_gps_is_not_read_after_the_swap(scenario_file):
    scenario = scenario_file("gps_failure")
    until_swap = run_scenario(scenario, RunOptions(ticks=5))
    full = run_scenario(scenario)

    assert until_swap.phone.access_count(Sensor.GPS) == 4
    assert full.phone.access_count(Sensor.GPS) == 4
    assert full.phone.access_count(Sensor.BLUETOOTH) == scenario.ticks


def test_static_run_keeps_the_initial_variants(scenario_file):
    scenario = scenario_file("gps_failure")
    result = run_scenario(scenario, RunOptions(static=True))

    assert result.exit_code == EXIT_OK
    assert result.of_kind(TraceKind.RECONFIG) == []
    assert len(result.of_kind(TraceKind.FAILURE)) == 1
    config = result.knowledge.value(ENSEMBLE_CONFIG)
    assert (config.active_cm, config.active_am) == (CMVariant.ALL_SENSORS, AMVariant.ALL_EFFECTORS)
    assert result.phone.access_count(Sensor.GPS) == scenario.ticks


def test_ticks_override_drops_events(scenario_file):
    result = run_scenario(scenario_file("gps_failure"), RunOptions(ticks=3))
    assert result.scenario.ticks == 3
    assert all(e.tick < 3 for e in result.scenario.events)
    assert result.of_kind(TraceKind.FAILURE) == []


def test_runtime_fault_ends_the_run():
    result = run_scenario(parse_scenario("ticks 5\n1 bt_disconnect home_pc\n"))
    assert result.exit_code == EXIT_FAULT
    assert result.lines[-1] == "1 fault error=DisconnectNotConnected"


# ============== RANDOM SCENARIOS ==============

def test_random_scenarios_are_reproducible():
    assert random_scenario(3).events == random_scenario(3).events
    assert random_scenario(3).events != random_scenario(4).events


@pytest.mark.parametrize("seed", SEEDS)
def test_recreating_controllers_every_tick_changes_nothing(seed):
    scenario = random_scenario(seed)
    plain = run_scenario(scenario)
    recreated = run_scenario(scenario, RunOptions(recreate=True))

    assert plain.exit_code == EXIT_OK
    assert recreated.text == plain.text


@pytest.mark.parametrize("seed", SEEDS)
def test_every_health_event_is_reported_once(seed):
    scenario = random_scenario(seed)
    health_events = [e for e in scenario.events if isinstance(e.event, (Fail, Restore))]
    result = run_scenario(scenario)

    failures = result.of_kind(TraceKind.FAILURE)
    assert len(failures) == len(health_events)
    assert [(r.tick, r.get("device")) for r in failures] == [
        (e.tick, e.event.device.value) for e in health_events
    ]


@pytest.mark.parametrize("seed", SEEDS)
def test_no_reconfiguration_after_the_last_event(seed):
    scenario = random_scenario(seed)
    result = run_scenario(scenario)
    assert all(r.tick <= scenario.last_event_tick for r in result.of_kind(TraceKind.RECONFIG))


@pytest.mark.parametrize("seed", SEEDS)
def test_context_state_stays_reachable(seed):
    result = run_scenario(random_scenario(seed))
    active = result.knowledge.value(ENSEMBLE_CONFIG).active_cm
    assert result.knowledge.value(CONTEXT_STATE) in reachable_states(active.afsm)


@pytest.mark.parametrize("seed", SEEDS)
def test_failed_ringtone_is_never_driven(seed):
    devices = (Device.GPS, Device.BLUETOOTH, Device.VIBRATION)
    base = random_scenario(seed, health_devices=devices)
    scenario = replace(base, events=[ScheduledEvent(0, Fail(Device.RINGTONE))] + base.events)
    validate_scenario(scenario)

    result = run_scenario(scenario)
    assert result.exit_code == EXIT_OK
    assert all(c.effector != Device.RINGTONE for c in result.phone.effector_calls)
    assert all(c.accepted for c in result.phone.effector_calls)


# ============== SCENARIO FILES ==============

def test_parse_headers_and_comments():
    scenario = parse_scenario("# commute\nname commute\nticks 4\n\n1 clock 600  # nine to ten\n3 fail gps\n")
    assert (scenario.name, scenario.ticks) == ("commute", 4)
    assert [e.tick for e in scenario.events] == [1, 3]
    assert scenario.last_event_tick == 3
    assert scenario.events_at(3) == [Fail(Device.GPS)]


def test_events_are_sorted_stably_by_tick():
    scenario = parse_scenario("ticks 5\n3 bt_connect peer_1\n1 clock 600\n3 bt_connect peer_2\n")
    assert [e.line for e in scenario.events] == [3, 2, 4]


def test_missing_ticks_header_uses_default():
    assert parse_scenario("1 clock 600\n").ticks == DEFAULT_TICKS


def test_load_scenario_names_after_file(tmp_path):
    path = tmp_path / "lunch.scn"
    path.write_text("ticks 2\n", encoding="utf-8")
    assert load_scenario(path).name == "lunch"


@pytest.mark.parametrize("text,line", [
    ("ticks 5\n1 teleport home\n", 2),
    ("ticks 5\n\n1 bt_connect\n", 3),
    ("ticks 5\nsoon clock 600\n", 2),
    ("ticks 5\n7 clock 600\n", 2),
    ("ticks 5\n1 fail gps\n2 fail gps\n", 3),
    ("ticks 5\n1 restore gps\n", 2),
    ("ticks 5\n1 fail gps\n1 restore gps\n", 3),
    ("ticks 5\n1 fail backlight\n", 2),
    ("ticks 5\n1 clock 1440\n", 2),
    ("ticks 5\n1 gps_fix maybe home 0 1 2\n", 2),
    ("ticks 5\n1 gps_fix valid moon 0 1 2\n", 2),
    ("ticks 5\n1 gps_fix valid other nan 1 2\n", 2),
    ("ticks 5\n1 gps_fix valid other 40 inf 2\n", 2),
    ("ticks 5\n\n1 gps_fix valid other 40 1 -inf\n", 3),
    ("ticks 0\n", 1),
    ("ticks 5\nticks 6\n", 2),
    ("ticks 5\n3 fail gps\n1 restore gps\n", 3),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


# ============== TRACE RECORDER ==============

def test_recorder_renders_each_queued_commit(knowledge, recorder):
    def burst(notification):
        knowledge.put(EFFECTOR_STATE, EffectorState(75, Vibration.OFF), 1)
        knowledge.put(EFFECTOR_STATE, EffectorState(0, Vibration.ON), 1)

    knowledge.watch(CONTEXT_STATE, burst)
    knowledge.put(CONTEXT_STATE, S.DRIVING, 1)

    assert [str(r) for r in recorder.records] == [
        "1 effector_set volume=75 vibration=OFF",
        "1 effector_set volume=0 vibration=ON",
    ]

"""
MetaController
Reacts to failures signalled by the FailureManager and reconfigures the
ensemble by swapping ContextManager / AdaptationManager variants
"""

import logging
from dataclasses import dataclass, replace
from itertools import product
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence, Union

from afsm import INITIAL_STATE, reachable_states
from bus import (
    Message, MessageBus, MicroControllerDescriptor,
    TOPIC_EFFECTORS_FAILURE, TOPIC_RULE_CHANGE, TOPIC_SENSORS_FAILURE,
)
from knowledge import CONTEXT_STATE, ENSEMBLE_CONFIG, HEALTH, Knowledge
from phone_sim import HealthState
from .messages import RuleChange
from .variants import AMVariant, CMVariant, META_CONTROLLER_DESCRIPTOR

if TYPE_CHECKING:
    from .ensemble import Ensemble

logger = logging.getLogger("adapter.ensemble.meta")


@dataclass(frozen=True)
class MetaRule:
    id: str
    name: str
    trigger: Callable[[HealthState], bool]
    target: Union[CMVariant, AMVariant]


# Adaptation rules related to the ContextManager
META_RULES_CM = (
    MetaRule("a", "Activate AllSensors", lambda h: h.gps_ok and h.bt_ok, CMVariant.ALL_SENSORS),
    MetaRule("b", "Activate NoGPS", lambda h: not h.gps_ok and h.bt_ok, CMVariant.NO_GPS),
    MetaRule("c", "Activate NoBluetooth", lambda h: h.gps_ok and not h.bt_ok, CMVariant.NO_BLUETOOTH),
    MetaRule("d", "Activate NoBluetoothNoGPS", lambda h: not h.gps_ok and not h.bt_ok,
             CMVariant.NO_GPS_NO_BLUETOOTH),
)

# Adaptation rules related to the AdaptationManager; the flags are effector
# availability, not the current volume/vibration settings
META_RULES_AM = (
    MetaRule("e", "Activate AllEffectors", lambda h: h.vibration_ok and h.ringtone_ok, AMVariant.ALL_EFFECTORS),
    MetaRule("f", "Activate NoRingtone", lambda h: h.vibration_ok and not h.ringtone_ok, AMVariant.NO_RINGTONE),
    MetaRule("g", "Activate NoVibration", lambda h: not h.vibration_ok and h.ringtone_ok, AMVariant.NO_VIBRATION),
    MetaRule("h", "Activate NoRingtone NoVibration", lambda h: not h.vibration_ok and not h.ringtone_ok,
             AMVariant.NO_RINGTONE_NO_VIBRATION),
)


@dataclass(frozen=True)
class EnsembleConfig:
    active_cm: CMVariant
    active_am: AMVariant
    since_tick: int
    rule: Optional[str] = None


def triggering_rules(rules: Sequence[MetaRule], h: HealthState) -> List[MetaRule]:
    return [r for r in rules if r.trigger(h)]


def _single(rules: Sequence[MetaRule], h: HealthState) -> MetaRule:
    matching = triggering_rules(rules, h)
    if len(matching) != 1:
        raise AssertionError(f"{len(matching)} meta rules trigger for {h}")
    return matching[0]


def context_rule(h: HealthState) -> MetaRule:
    return _single(META_RULES_CM, h)


def adaptation_rule(h: HealthState) -> MetaRule:
    return _single(META_RULES_AM, h)


def select_context_manager(h: HealthState) -> CMVariant:
    return context_rule(h).target


def select_adaptation_manager(h: HealthState) -> AMVariant:
    return adaptation_rule(h).target


def all_health_states() -> List[HealthState]:
    return [HealthState(*flags) for flags in product((True, False), repeat=4)]


def config_map() -> Dict[HealthState, EnsembleConfig]:
    """The controller configuration for each of the 2^(2+2) health combinations"""
    return {
        h: EnsembleConfig(select_context_manager(h), select_adaptation_manager(h), since_tick=0)
        for h in all_health_states()
    }


@dataclass(frozen=True)
class MetaController:
    knowledge: Knowledge
    bus: MessageBus
    ensemble: "Ensemble"

    @property
    def descriptor(self) -> MicroControllerDescriptor:
        return META_CONTROLLER_DESCRIPTOR

    def on_receive(self, message: Message) -> None:
        if message.topic in (TOPIC_SENSORS_FAILURE, TOPIC_EFFECTORS_FAILURE):
            self.on_failure(message.topic, message.payload)

    def on_failure(self, topic: str, health: HealthState) -> None:
        """/sensorsFailure and /effectorsFailure"""
        if topic == TOPIC_SENSORS_FAILURE:
            self._activate_context_manager(health)
        elif topic == TOPIC_EFFECTORS_FAILURE:
            self._activate_adaptation_manager(health)
        else:
            logger.warning(f"[MetaController] Ignoring {topic}")

    def _activate_context_manager(self, health: HealthState) -> None:
        config: EnsembleConfig = self.knowledge.value(ENSEMBLE_CONFIG)
        rule = context_rule(health)
        if rule.target == config.active_cm:
            logger.debug(f"[MetaController] {rule.target.controller_id} already active")
            return

        tick = self._tick()
        replacement = self.ensemble.context_manager(rule.target)
        self.bus.swap(config.active_cm.controller_id, replacement.descriptor, replacement.on_receive)
        self.knowledge.put(
            ENSEMBLE_CONFIG, replace(config, active_cm=rule.target, since_tick=tick, rule=rule.id), tick,
        )
        logger.info(f"[MetaController] Rule {rule.id}: {config.active_cm.controller_id} -> "
                    f"{rule.target.controller_id}")

        # Project the stored context onto the new contextual space
        state = self.knowledge.value(CONTEXT_STATE, INITIAL_STATE)
        if state not in reachable_states(rule.target.afsm):
            logger.info(f"[MetaController] {state.value} unreachable for {rule.target.value}, back to General")
            self.bus.publish(TOPIC_RULE_CHANGE, RuleChange(tick, state, rule.id), sender=self.descriptor.id)

    def _activate_adaptation_manager(self, health: HealthState) -> None:
        config: EnsembleConfig = self.knowledge.value(ENSEMBLE_CONFIG)
        rule = adaptation_rule(health)
        if rule.target == config.active_am:
            logger.debug(f"[MetaController] {rule.target.controller_id} already active")
            return

        tick = self._tick()
        replacement = self.ensemble.adaptation_manager(rule.target)
        self.bus.swap(config.active_am.controller_id, replacement.descriptor, replacement.on_receive)
        self.knowledge.put(
            ENSEMBLE_CONFIG, replace(config, active_am=rule.target, since_tick=tick, rule=rule.id), tick,
        )
        logger.info(f"[MetaController] Rule {rule.id}: {config.active_am.controller_id} -> "
                    f"{rule.target.controller_id}")

    def _tick(self) -> int:
        """Logical time of the health report being handled"""
        entry = self.knowledge.get(HEALTH)
        return entry.tick if entry else 0

"""
Ensemble
Builds the PhoneAdapter micro-controllers and deploys them on the bus
"""

import logging
from typing import Optional

from afsm import INITIAL_STATE
from bus import Message, MessageBus, Role
from knowledge import CONTEXT_STATE, ENSEMBLE_CONFIG, HEALTH, Knowledge
from phone_sim import HealthState, PhoneSimulator
from .adaptation_manager import AdaptationManager
from .context_manager import ContextManager
from .failure_manager import FailureManager
from .meta_controller import EnsembleConfig, MetaController, select_adaptation_manager, select_context_manager
from .variants import AMVariant, CMVariant, KNOWLEDGE_DESCRIPTOR

logger = logging.getLogger("adapter.ensemble")


def _knowledge_handler(message: Message) -> None:
    """Knowledge subscribes to nothing; it is reached through direct calls"""


class Ensemble:
    """
    Factory and deployment of the micro-controller ensemble

    Delivery order on the bus follows deployment order:
    Knowledge, FailureManager, MetaController, ContextManager, AdaptationManager.
    A static ensemble has no MetaController and keeps its initial variants
    whatever fails.
    """

    def __init__(self, knowledge: Knowledge, bus: MessageBus, phone: PhoneSimulator, static: bool = False):
        self.knowledge = knowledge
        self.bus = bus
        self.phone = phone
        self.static = static

    # ============== FACTORY ==============

    def context_manager(self, variant: CMVariant) -> ContextManager:
        return ContextManager(CMVariant(variant), self.knowledge, self.bus, self.phone)

    def adaptation_manager(self, variant: AMVariant) -> AdaptationManager:
        return AdaptationManager(AMVariant(variant), self.knowledge, self.bus, self.phone)

    def failure_manager(self) -> FailureManager:
        return FailureManager(self.knowledge, self.bus, self.phone)

    def meta_controller(self) -> MetaController:
        return MetaController(self.knowledge, self.bus, self)

    # ============== DEPLOYMENT ==============

    def deploy(self, tick: int = 0) -> EnsembleConfig:
        """
        Seed Knowledge and register every micro-controller

        Args:
            tick: Logical time of the seed writes

        Returns:
            The initial ensemble configuration
        """
        health = self.phone.probe_health()
        config = EnsembleConfig(
            active_cm=select_context_manager(health),
            active_am=select_adaptation_manager(health),
            since_tick=tick,
        )
        self.knowledge.put(HEALTH, health, tick)
        self.knowledge.put(CONTEXT_STATE, INITIAL_STATE, tick)
        self.knowledge.new_effector_data(self.phone.effectors, tick)
        self.knowledge.put(ENSEMBLE_CONFIG, config, tick)

        self.bus.register(KNOWLEDGE_DESCRIPTOR, _knowledge_handler)

        fm = self.failure_manager()
        self.bus.register(fm.descriptor, fm.on_receive)

        if not self.static:
            meta = self.meta_controller()
            self.bus.register(meta.descriptor, meta.on_receive)

        cm = self.context_manager(config.active_cm)
        self.bus.register(cm.descriptor, cm.on_receive)
        am = self.adaptation_manager(config.active_am)
        self.bus.register(am.descriptor, am.on_receive)

        logger.info(f"[Ensemble] Deployed {cm.descriptor.id} + {am.descriptor.id}"
                    f"{' (static)' if self.static else ''}")
        return config

    def recreate_active(self) -> None:
        """Destroy the active ContextManager and AdaptationManager and rebind fresh instances"""
        config = self.config
        if config is None:
            raise RuntimeError("ensemble is not deployed")

        cm = self.context_manager(config.active_cm)
        self.bus.swap(cm.descriptor.id, cm.descriptor, cm.on_receive)
        am = self.adaptation_manager(config.active_am)
        self.bus.swap(am.descriptor.id, am.descriptor, am.on_receive)

    @property
    def config(self) -> Optional[EnsembleConfig]:
        return self.knowledge.value(ENSEMBLE_CONFIG)

    @property
    def health(self) -> HealthState:
        return self.knowledge.value(HEALTH, HealthState())

    def active_ids(self):
        """(ContextManager id, AdaptationManager id) currently on the bus"""
        cm = self.bus.active(Role.CONTEXT_MANAGER)
        am = self.bus.active(Role.ADAPTATION_MANAGER)
        return (cm[0] if cm else None, am[0] if am else None)

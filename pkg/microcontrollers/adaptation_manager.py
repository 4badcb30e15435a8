"""
AdaptationManager micro-controllers
The single executor of adaptation plans: applies context outputs to the
effectors the variant is allowed to drive
"""

import logging
from dataclasses import dataclass

from afsm import INITIAL_STATE, Output
from bus import Message, MessageBus, MicroControllerDescriptor, TOPIC_NEW_CONTEXT, TOPIC_RULE_CHANGE
from config import INITIAL_VOLUME, INITIAL_VIBRATION
from knowledge import CONTEXT_STATE, Knowledge
from phone_sim import Device, EffectorFailed, PhoneSimulator
from .messages import NewContext, RuleChange
from .variants import AMVariant

logger = logging.getLogger("adapter.ensemble.am")

GENERAL_OUTPUT = Output(INITIAL_VOLUME, INITIAL_VIBRATION)


@dataclass(frozen=True)
class AdaptationManager:
    variant: AMVariant
    knowledge: Knowledge
    bus: MessageBus
    phone: PhoneSimulator

    @property
    def descriptor(self) -> MicroControllerDescriptor:
        return self.variant.descriptor

    def on_receive(self, message: Message) -> None:
        if message.topic == TOPIC_NEW_CONTEXT:
            self.process_new_context(message.payload)
        elif message.topic == TOPIC_RULE_CHANGE:
            self.process_rule_change(message.payload)

    def process_new_context(self, context: NewContext) -> None:
        """/processNewContext"""
        self._apply(context.output, context.tick)

    def process_rule_change(self, change: RuleChange) -> None:
        """/processRuleChange: back to the General state"""
        self.knowledge.put(CONTEXT_STATE, INITIAL_STATE, change.tick)
        self._apply(GENERAL_OUTPUT, change.tick)

    def _apply(self, output: Output, tick: int) -> None:
        caller = self.descriptor.id
        mask = self.variant.mask
        try:
            if Device.RINGTONE in mask:
                self.phone.set_volume(output.volume, caller=caller)
        except EffectorFailed as e:
            logger.warning(f"[{caller}] {e}, volume left at {self.phone.effectors.volume}")
        try:
            if Device.VIBRATION in mask:
                self.phone.set_vibration(output.vibration, caller=caller)
        except EffectorFailed as e:
            logger.warning(f"[{caller}] {e}, vibration left {self.phone.effectors.vibration.value}")

        # /NewEffectorData with what the phone actually reports
        self.knowledge.new_effector_data(self.phone.effectors, tick)

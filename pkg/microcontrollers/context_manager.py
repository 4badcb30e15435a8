"""
ContextManager micro-controllers
Read the sensors the variant can rely on, store the snapshot and run the
variant's A-FSM against the context state held in Knowledge
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Tuple

from afsm import INITIAL_STATE, step
from bus import Message, MessageBus, MicroControllerDescriptor, TOPIC_NEW_CONTEXT, TOPIC_TICK
from knowledge import CONTEXT_STATE, Knowledge
from phone_sim import PhoneSimulator, Sensor
from .errors import OperationUnsupported
from .messages import NewContext, Stage, TickSignal
from .variants import CMVariant

logger = logging.getLogger("adapter.ensemble.cm")


@dataclass(frozen=True)
class ContextManager:
    variant: CMVariant
    knowledge: Knowledge
    bus: MessageBus
    phone: PhoneSimulator

    @property
    def descriptor(self) -> MicroControllerDescriptor:
        return self.variant.descriptor

    def on_receive(self, message: Message) -> None:
        if message.topic == TOPIC_TICK and isinstance(message.payload, TickSignal):
            if message.payload.stage == Stage.ANALYZE:
                self.generate_context(message.payload.tick)

    def generate_context(self, tick: int) -> None:
        """/generateContext"""
        snapshot = self.phone.read_sensors(self.variant.mask)
        self.knowledge.new_sensor_context(snapshot, tick)

        state = self.knowledge.value(CONTEXT_STATE, INITIAL_STATE)
        result = step(self.variant.afsm, state, snapshot)
        if result.fired is None:
            return

        self.knowledge.put(CONTEXT_STATE, result.new_state, tick)
        logger.debug(f"[{self.descriptor.id}] {state.value} -> {result.new_state.value} (rule {result.fired})")
        self.bus.publish(
            TOPIC_NEW_CONTEXT,
            NewContext(
                tick=tick,
                old_state=state,
                new_state=result.new_state,
                rule=result.fired,
                output=result.output,
                conflicts=result.conflicts,
            ),
            sender=self.descriptor.id,
        )

    def sensing_bluetooth(self) -> FrozenSet[str]:
        """/sensingBluetooth"""
        self._require("/sensingBluetooth")
        return self.phone.read_sensors({Sensor.BLUETOOTH}).bluetooth

    def location_listener(self) -> Tuple[float, float]:
        """/locationListener"""
        self._require("/locationListener")
        gps = self.phone.read_sensors({Sensor.GPS}).gps
        return gps.lat, gps.lon

    def _require(self, operation: str) -> None:
        if operation not in self.descriptor.operations:
            raise OperationUnsupported(f"{self.descriptor.id} has no {operation}")

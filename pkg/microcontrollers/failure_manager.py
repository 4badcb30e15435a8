"""
FailureManager micro-controller
Edge-triggered health monitoring: compares the phone's device status with the
last status stored in Knowledge and reports every change exactly once
"""

import logging
from dataclasses import dataclass
from enum import Enum

from bus import (
    Message, MessageBus, MicroControllerDescriptor,
    TOPIC_EFFECTORS_FAILURE, TOPIC_SENSORS_FAILURE, TOPIC_TICK,
)
from knowledge import FAILURES_LATEST, HEALTH, Knowledge
from phone_sim import Device, HealthState, PhoneSimulator
from .messages import Stage, TickSignal
from .variants import FAILURE_MANAGER_DESCRIPTOR

logger = logging.getLogger("adapter.ensemble.fm")


class FailureStatus(str, Enum):
    FAILED = "failed"
    RESTORED = "restored"


@dataclass(frozen=True)
class FailureRecord:
    device: Device
    status: FailureStatus
    tick: int


def failure_key(device: Device) -> str:
    return f"failures/{device.value}"


@dataclass(frozen=True)
class FailureManager:
    knowledge: Knowledge
    bus: MessageBus
    phone: PhoneSimulator

    @property
    def descriptor(self) -> MicroControllerDescriptor:
        return FAILURE_MANAGER_DESCRIPTOR

    def on_receive(self, message: Message) -> None:
        if message.topic == TOPIC_TICK and isinstance(message.payload, TickSignal):
            if message.payload.stage == Stage.MONITOR:
                self.verify_sensors(message.payload.tick)
                self.verify_effectors(message.payload.tick)

    def verify_sensors(self, tick: int) -> None:
        """/verifySensors"""
        self._verify(tick, TOPIC_SENSORS_FAILURE, sensors=True)

    def verify_effectors(self, tick: int) -> None:
        """/verifyEffectors"""
        self._verify(tick, TOPIC_EFFECTORS_FAILURE, sensors=False)

    def _verify(self, tick: int, topic: str, sensors: bool) -> None:
        probed = self.phone.probe_health()
        stored = self.knowledge.value(HEALTH, HealthState())
        changed = [d for d in probed.changed_devices(stored) if d.is_sensor == sensors]
        if not changed:
            return

        updated = stored
        for device in changed:
            updated = updated.with_device(device, probed.is_ok(device))
        self.knowledge.put(HEALTH, updated, tick)

        for device in changed:
            status = FailureStatus.RESTORED if updated.is_ok(device) else FailureStatus.FAILED
            record = FailureRecord(device, status, tick)
            self.knowledge.put(failure_key(device), record, tick)
            self.knowledge.put(FAILURES_LATEST, record, tick)
            logger.info(f"[FailureManager] {device.value} {status.value} at tick {tick}")

        self.bus.publish(topic, updated, sender=self.descriptor.id)

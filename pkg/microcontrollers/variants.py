"""
ContextManager and AdaptationManager variants and the bus descriptors of
every PhoneAdapter micro-controller
"""

from enum import Enum
from typing import FrozenSet

from afsm import AFSMDef, build_variant
from bus import (
    MicroControllerDescriptor, Role,
    TOPIC_NEW_CONTEXT, TOPIC_RULE_CHANGE, TOPIC_SENSORS_FAILURE, TOPIC_EFFECTORS_FAILURE, TOPIC_TICK,
)
from knowledge import KNOWLEDGE_OPERATIONS
from phone_sim import Device, Sensor


class CMVariant(str, Enum):
    ALL_SENSORS = "AllSensors"
    NO_GPS = "NoGPS"
    NO_BLUETOOTH = "NoBluetooth"
    NO_GPS_NO_BLUETOOTH = "NoGPSNoBluetooth"

    @property
    def gps_ok(self) -> bool:
        return self in (CMVariant.ALL_SENSORS, CMVariant.NO_BLUETOOTH)

    @property
    def bt_ok(self) -> bool:
        return self in (CMVariant.ALL_SENSORS, CMVariant.NO_GPS)

    @property
    def mask(self) -> FrozenSet[Sensor]:
        """Sensors this variant reads; the calendar probe is always used"""
        sensors = {Sensor.CALENDAR}
        if self.gps_ok:
            sensors.add(Sensor.GPS)
        if self.bt_ok:
            sensors.add(Sensor.BLUETOOTH)
        return frozenset(sensors)

    @property
    def afsm(self) -> AFSMDef:
        return build_variant(self.gps_ok, self.bt_ok)

    @property
    def controller_id(self) -> str:
        return f"ContextManager{self.value}"

    @property
    def descriptor(self) -> MicroControllerDescriptor:
        operations = {"/generateContext"}
        if self.bt_ok:
            operations.add("/sensingBluetooth")
        if self.gps_ok:
            operations.add("/locationListener")
        return MicroControllerDescriptor(
            id=self.controller_id,
            role=Role.CONTEXT_MANAGER,
            subscriptions=frozenset({TOPIC_TICK}),
            operations=frozenset(operations),
        )


class AMVariant(str, Enum):
    ALL_EFFECTORS = "AllEffectors"
    NO_RINGTONE = "NoRingtone"
    NO_VIBRATION = "NoVibration"
    NO_RINGTONE_NO_VIBRATION = "NoRingtoneNoVibration"

    @property
    def ringtone_ok(self) -> bool:
        return self in (AMVariant.ALL_EFFECTORS, AMVariant.NO_VIBRATION)

    @property
    def vibration_ok(self) -> bool:
        return self in (AMVariant.ALL_EFFECTORS, AMVariant.NO_RINGTONE)

    @property
    def mask(self) -> FrozenSet[Device]:
        """Effectors this variant drives"""
        effectors = set()
        if self.ringtone_ok:
            effectors.add(Device.RINGTONE)
        if self.vibration_ok:
            effectors.add(Device.VIBRATION)
        return frozenset(effectors)

    @property
    def controller_id(self) -> str:
        return f"AdaptationManager{self.value}"

    @property
    def descriptor(self) -> MicroControllerDescriptor:
        return MicroControllerDescriptor(
            id=self.controller_id,
            role=Role.ADAPTATION_MANAGER,
            subscriptions=frozenset({TOPIC_NEW_CONTEXT, TOPIC_RULE_CHANGE}),
            operations=frozenset({"/processNewContext", "/processRuleChange"}),
        )


KNOWLEDGE_DESCRIPTOR = MicroControllerDescriptor(
    id="Knowledge",
    role=Role.KNOWLEDGE,
    subscriptions=frozenset(),
    operations=KNOWLEDGE_OPERATIONS,
)

FAILURE_MANAGER_DESCRIPTOR = MicroControllerDescriptor(
    id="FailureManager",
    role=Role.FAILURE_MANAGER,
    subscriptions=frozenset({TOPIC_TICK}),
    operations=frozenset({"/verifySensors", "/verifyEffectors"}),
)

META_CONTROLLER_DESCRIPTOR = MicroControllerDescriptor(
    id="MetaController",
    role=Role.META_CONTROLLER,
    subscriptions=frozenset({TOPIC_SENSORS_FAILURE, TOPIC_EFFECTORS_FAILURE}),
    operations=frozenset({"/sensorsFailure", "/effectorsFailure"}),
)

"""
Choreography bus
Topic-based delivery between micro-controllers plus the lifecycle operations
(register, unregister, swap) the MetaController uses to restructure the ensemble
"""

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Deque, Dict, FrozenSet, List, Optional

logger = logging.getLogger("adapter.bus")

# Topics: micro-controller operation names without the leading slash
TOPIC_NEW_CONTEXT = "newContext"
TOPIC_RULE_CHANGE = "ruleChange"
TOPIC_SENSORS_FAILURE = "sensorsFailure"
TOPIC_EFFECTORS_FAILURE = "effectorsFailure"
TOPIC_TICK = "tick"

TOPICS = frozenset({
    TOPIC_NEW_CONTEXT,
    TOPIC_RULE_CHANGE,
    TOPIC_SENSORS_FAILURE,
    TOPIC_EFFECTORS_FAILURE,
    TOPIC_TICK,
})


class Role(str, Enum):
    CONTEXT_MANAGER = "ContextManager"
    ADAPTATION_MANAGER = "AdaptationManager"
    FAILURE_MANAGER = "FailureManager"
    META_CONTROLLER = "MetaController"
    KNOWLEDGE = "Knowledge"


# Roles with at most one active variant at any instant
EXCLUSIVE_ROLES = frozenset({Role.CONTEXT_MANAGER, Role.ADAPTATION_MANAGER})


class BusError(Exception):
    """Base class for bus errors"""


class DuplicateId(BusError, ValueError):
    pass


class RoleOccupied(BusError, ValueError):
    pass


class UnknownId(BusError, LookupError):
    pass


class RoleMismatch(BusError, ValueError):
    pass


class UnknownSender(BusError, LookupError):
    pass


class DispatchError(BusError, RuntimeError):
    """A handler raised while a message was being delivered to it"""

    def __init__(self, handler_id: str, message: "Message", cause: BaseException):
        super().__init__(f"{handler_id} failed on {message.topic}#{message.seq}: {cause}")
        self.handler_id = handler_id
        self.message = message


@dataclass(frozen=True)
class MicroControllerDescriptor:
    id: str
    role: Role
    subscriptions: FrozenSet[str]
    operations: FrozenSet[str]

    def __post_init__(self):
        if not self.id:
            raise ValueError("descriptor id must not be empty")
        if not self.operations:
            raise ValueError(f"{self.id}: operations must not be empty")
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "subscriptions", frozenset(self.subscriptions))
        object.__setattr__(self, "operations", frozenset(self.operations))


@dataclass(frozen=True, order=True)
class Message:
    seq: int
    topic: str = field(compare=False)
    payload: Any = field(compare=False)
    sender: str = field(compare=False)


Handler = Callable[[Message], None]
Tap = Callable[[Message], None]


@dataclass
class _Slot:
    """A delivery position; swap rebinds the slot instead of moving it"""
    descriptor: MicroControllerDescriptor
    handler: Handler
    live: bool = True


class MessageBus:
    """
    Single logical dispatcher

    Publishing from outside a dispatch drains the queue before returning.
    Publishing from inside a handler only queues: the message is delivered
    after the current handler returns, in global sequence order, which keeps
    every subscriber's per-topic order FIFO.
    """

    def __init__(self):
        self._slots: List[_Slot] = []
        self._by_id: Dict[str, _Slot] = {}
        self._pending: Deque[Message] = deque()
        self._taps: List[Tap] = []
        self._seq = 0
        self._dispatching = False
        self._paused = 0
        self._lock = threading.RLock()

        # Called with "paused", "rebound", "resumed" during swap
        self.swap_observer: Optional[Callable[[str], None]] = None

    # ============== LIFECYCLE ==============

    def register(self, descriptor: MicroControllerDescriptor, handler: Handler) -> None:
        """Activate a micro-controller (registerReceiver)"""
        with self._lock:
            if descriptor.id in self._by_id:
                raise DuplicateId(f"{descriptor.id} is already registered")
            if descriptor.role in EXCLUSIVE_ROLES and self.active(descriptor.role):
                raise RoleOccupied(
                    f"cannot register {descriptor.id}: {descriptor.role.value} "
                    f"already served by {self.active(descriptor.role)[0]}"
                )
            slot = _Slot(descriptor, handler)
            self._slots.append(slot)
            self._by_id[descriptor.id] = slot
            logger.info(f"[Bus] Registered {descriptor.id} ({descriptor.role.value})")
            self._check_roles()

    def unregister(self, controller_id: str) -> None:
        """Deactivate a micro-controller (unregisterReceiver)"""
        with self._lock:
            slot = self._by_id.pop(controller_id, None)
            if slot is None:
                raise UnknownId(f"{controller_id} is not registered")
            slot.live = False
            self._slots.remove(slot)
            logger.info(f"[Bus] Unregistered {controller_id}")
            self._check_roles()

    def swap(
        self,
        old_id: str,
        descriptor: MicroControllerDescriptor,
        handler: Handler,
    ) -> None:
        """
        Atomically replace a registered micro-controller with a variant of the same role

        Dispatch is paused, the slot is rebound, then dispatch resumes, so
        every message reaches exactly one of the two handlers.
        """
        with self._lock:
            slot = self._by_id.get(old_id)
            if slot is None:
                raise UnknownId(f"{old_id} is not registered")
            if descriptor.role != slot.descriptor.role:
                raise RoleMismatch(
                    f"cannot swap {old_id} ({slot.descriptor.role.value}) "
                    f"for {descriptor.id} ({descriptor.role.value})"
                )
            if descriptor.id != old_id and descriptor.id in self._by_id:
                raise DuplicateId(f"{descriptor.id} is already registered")

            self._paused += 1
            try:
                self._observe("paused")
                del self._by_id[old_id]
                slot.descriptor = descriptor
                slot.handler = handler
                self._by_id[descriptor.id] = slot
                self._check_roles()
                self._observe("rebound")
            finally:
                self._paused -= 1

            if old_id == descriptor.id:
                logger.debug(f"[Bus] Rebound {old_id}")
            else:
                logger.info(f"[Bus] Swapped {old_id} -> {descriptor.id}")
            self._observe("resumed")
            self._drain()

    # ============== DELIVERY ==============

    def publish(self, topic: str, payload: Any, sender: str) -> int:
        """
        Queue a message and deliver it unless a dispatch is already running

        Returns:
            The message's global sequence number
        """
        with self._lock:
            if sender not in self._by_id:
                raise UnknownSender(f"{sender} is not registered")
            if topic not in TOPICS:
                logger.warning(f"[Bus] {sender} published on unknown topic {topic!r}")
            self._seq += 1
            message = Message(self._seq, topic, payload, sender)
            self._pending.append(message)
            logger.debug(f"[Bus] #{message.seq} {topic} from {sender}")
            self._drain()
            return message.seq

    def add_tap(self, tap: Tap) -> None:
        """Observe every message at delivery time, before its subscribers"""
        with self._lock:
            self._taps.append(tap)

    def _drain(self) -> None:
        if self._dispatching or self._paused:
            return
        self._dispatching = True
        try:
            while self._pending and not self._paused:
                message = self._pending.popleft()
                for tap in list(self._taps):
                    tap(message)
                for slot in list(self._slots):
                    # Read the binding at call time so a swap during this
                    # message hands the not-yet-visited slot to the new handler
                    if not slot.live or message.topic not in slot.descriptor.subscriptions:
                        continue
                    controller_id = slot.descriptor.id
                    try:
                        slot.handler(message)
                    except Exception as e:
                        logger.error(f"[Bus] {controller_id} failed on #{message.seq} {message.topic}: {e}",
                                     exc_info=True)
                        self._pending.clear()
                        raise DispatchError(controller_id, message, e) from e
        finally:
            self._dispatching = False

    def _observe(self, phase: str) -> None:
        if self.swap_observer:
            self.swap_observer(phase)

    def _check_roles(self) -> None:
        for role in EXCLUSIVE_ROLES:
            active = self.active(role)
            assert len(active) <= 1, f"more than one active {role.value}: {active}"

    # ============== QUERIES ==============

    def is_registered(self, controller_id: str) -> bool:
        return controller_id in self._by_id

    def descriptor(self, controller_id: str) -> MicroControllerDescriptor:
        slot = self._by_id.get(controller_id)
        if slot is None:
            raise UnknownId(f"{controller_id} is not registered")
        return slot.descriptor

    def active(self, role: Role) -> List[str]:
        """Ids of the registered micro-controllers serving role"""
        return [s.descriptor.id for s in self._slots if s.live and s.descriptor.role == role]

    def registered(self) -> List[str]:
        return [s.descriptor.id for s in self._slots if s.live]

    @property
    def pending(self) -> int:
        """Messages queued but not yet delivered"""
        return len(self._pending)

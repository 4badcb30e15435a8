"""
Knowledge
Shared blackboard holding every piece of persistent controller state, so the
other micro-controllers can stay stateless
"""

import logging
import threading
from collections import deque
from dataclasses import dataclass
from itertools import count
from typing import Any, Callable, Deque, Dict, List, Optional, Tuple

logger = logging.getLogger("adapter.knowledge")

# Well-known keys
CONTEXT_STATE = "context/state"
SENSOR_SNAPSHOT = "sensors/snapshot"
EFFECTOR_STATE = "effectors/state"
HEALTH = "health"
ENSEMBLE_CONFIG = "ensemble/config"
FAILURES_LATEST = "failures/latest"

# Operations offered by the Knowledge micro-controller
KNOWLEDGE_OPERATIONS = frozenset({"/NewSensorContext", "/NewEffectorData"})


class KnowledgeError(Exception):
    """Base class for Knowledge errors"""


class MalformedKey(KnowledgeError, ValueError):
    pass


class TickRegression(KnowledgeError, ValueError):
    pass


class InvalidValue(KnowledgeError, TypeError):
    pass


def check_key(path: str) -> str:
    """Validate a slash-separated key and return it unchanged"""
    if not isinstance(path, str) or not path:
        raise MalformedKey(f"key must be a non-empty string, got {path!r}")
    if path.startswith("/") or path.endswith("/"):
        raise MalformedKey(f"key must not start or end with '/': {path!r}")
    if any(not segment for segment in path.split("/")):
        raise MalformedKey(f"key has an empty segment: {path!r}")
    return path


def key_matches(prefix: str, key: str) -> bool:
    """Segment-wise prefix test: 'sensors' matches 'sensors/snapshot', not 'sensorsX'"""
    return key == prefix or key.startswith(prefix + "/")


_value_types: Optional[Tuple[type, ...]] = None


def value_types() -> Tuple[type, ...]:
    """The closed set of value types Knowledge accepts"""
    global _value_types
    if _value_types is None:
        # Resolved lazily: the value types live in modules that import Knowledge
        from afsm.model import ContextState
        from phone_sim import SensorSnapshot, EffectorState, HealthState
        from microcontrollers.failure_manager import FailureRecord
        from microcontrollers.meta_controller import EnsembleConfig

        _value_types = (ContextState, SensorSnapshot, EffectorState, HealthState,
                        FailureRecord, EnsembleConfig)
    return _value_types


@dataclass(frozen=True)
class KnowledgeEntry:
    key: str
    value: Any
    version: int
    tick: int


@dataclass(frozen=True)
class ChangeNotification:
    key: str
    old_version: Optional[int]
    new_version: int
    entry: Optional[KnowledgeEntry] = None   # the committed entry, not whatever is current at delivery


@dataclass(frozen=True)
class Subscription:
    """Handle returned by watch"""
    id: int
    prefix: str


NotificationSink = Callable[[ChangeNotification], None]


class Knowledge:
    """
    Versioned key/value blackboard with prefix watches

    All commits go through one lock; last write wins. Notifications are
    delivered synchronously in commit order. A watcher that writes while being
    notified gets its commit queued behind the current notification round.
    A watcher error does not stop delivery: the round finishes and the first
    error is raised afterwards.
    """

    def __init__(self):
        self._entries: Dict[str, KnowledgeEntry] = {}
        self._watchers: Dict[int, Tuple[Subscription, NotificationSink]] = {}
        self._ids = count(1)
        self._pending: Deque[ChangeNotification] = deque()
        self._notifying = False
        self._lock = threading.RLock()

    def put(self, key: str, value: Any, tick: int) -> int:
        """
        Commit a new value for key

        Args:
            key: Slash-separated key
            value: One of the Knowledge value types
            tick: Logical time of the write, never earlier than the last write

        Returns:
            The new version of key
        """
        check_key(key)
        if not isinstance(value, value_types()):
            raise InvalidValue(f"{type(value).__name__} cannot be stored in Knowledge")

        with self._lock:
            previous = self._entries.get(key)
            if previous is not None and tick < previous.tick:
                raise TickRegression(
                    f"write to {key} at tick {tick} precedes last write at tick {previous.tick}"
                )
            old_version = previous.version if previous else None
            version = (old_version or 0) + 1
            entry = KnowledgeEntry(key, value, version, tick)
            self._entries[key] = entry
            logger.debug(f"[Knowledge] {key} v{version} @{tick}: {value!r}")

            self._pending.append(ChangeNotification(key, old_version, version, entry))
            self._notify()
            return version

    def get(self, key: str) -> Optional[KnowledgeEntry]:
        """Latest committed entry for key, or None"""
        check_key(key)
        with self._lock:
            return self._entries.get(key)

    def value(self, key: str, default: Any = None) -> Any:
        """Shortcut for the latest value of key"""
        entry = self.get(key)
        return entry.value if entry else default

    def watch(self, prefix: str, subscriber: NotificationSink) -> Subscription:
        """Deliver one notification per later commit whose key falls under prefix"""
        check_key(prefix)
        with self._lock:
            handle = Subscription(next(self._ids), prefix)
            self._watchers[handle.id] = (handle, subscriber)
            return handle

    def unwatch(self, handle: Subscription) -> None:
        with self._lock:
            self._watchers.pop(handle.id, None)

    # Knowledge micro-controller operations

    def new_sensor_context(self, snapshot, tick: int) -> int:
        """/NewSensorContext"""
        return self.put(SENSOR_SNAPSHOT, snapshot, tick)

    def new_effector_data(self, state, tick: int) -> int:
        """/NewEffectorData"""
        return self.put(EFFECTOR_STATE, state, tick)

    def keys(self) -> List[str]:
        with self._lock:
            return list(self._entries)

    def snapshot(self) -> Dict[str, Any]:
        """Current value of every key"""
        with self._lock:
            return {key: entry.value for key, entry in self._entries.items()}

    def _notify(self) -> None:
        if self._notifying:
            return
        self._notifying = True
        failure: Optional[Exception] = None
        try:
            while self._pending:
                notification = self._pending.popleft()
                for handle, subscriber in list(self._watchers.values()):
                    if handle.id not in self._watchers or not key_matches(handle.prefix, notification.key):
                        continue
                    try:
                        subscriber(notification)
                    except Exception as e:
                        logger.error(
                            f"[Knowledge] Watcher {handle.id} failed on {notification.key} "
                            f"v{notification.new_version}: {e}",
                            exc_info=True,
                        )
                        if failure is None:
                            failure = e
        finally:
            self._notifying = False
        # Every queued commit has been announced; the first watcher error surfaces now
        if failure is not None:
            raise failure

"""
Payloads carried on the choreography bus
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from afsm import ContextState, Output


class Stage(str, Enum):
    """Which part of the feedback loop a tick signal starts"""
    MONITOR = "monitor"   # FailureManager verifies sensors and effectors
    ANALYZE = "analyze"   # ContextManager generates the context


@dataclass(frozen=True)
class TickSignal:
    tick: int
    stage: Stage


@dataclass(frozen=True)
class NewContext:
    tick: int
    old_state: ContextState
    new_state: ContextState
    rule: str
    output: Output
    conflicts: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RuleChange:
    """Back to the General state after a ContextManager swap"""
    tick: int
    from_state: ContextState
    reason: Optional[str] = None

"""
A-FSM definitions: contextual states, rules, outputs and step results
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from phone_sim import Vibration
from .predicates import (
    AfsmError, CyclicRuleRef, Not, And, Or, Predicate, RuleNegation, UnresolvedRuleRef,
)


class ContextState(str, Enum):
    GENERAL = "General"
    OUTDOOR = "Outdoor"
    JOGGING = "Jogging"
    DRIVING = "Driving"
    DRIVING_FAST = "DrivingFast"
    HOME = "Home"
    OFFICE = "Office"
    MEETING = "Meeting"
    SYNC = "Sync"


INITIAL_STATE = ContextState.GENERAL

_RULE_ID = re.compile(r"^[a-z]$")


@dataclass(frozen=True)
class Output:
    volume: int
    vibration: Vibration

    def __post_init__(self):
        if not 0 <= self.volume <= 100:
            raise ValueError(f"volume must be within 0..100, got {self.volume}")
        object.__setattr__(self, "vibration", Vibration(self.vibration))

    def __str__(self) -> str:
        return f"{self.volume}/{self.vibration.value}"


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    from_states: FrozenSet[ContextState]
    to: ContextState
    predicate: Predicate
    output: Output

    def __post_init__(self):
        if not _RULE_ID.match(self.id):
            raise AfsmError(f"rule id must be a single letter, got {self.id!r}")
        states = frozenset(ContextState(s) for s in self.from_states)
        if not states:
            raise AfsmError(f"rule {self.id}: from-states must not be empty")
        object.__setattr__(self, "from_states", states)
        object.__setattr__(self, "to", ContextState(self.to))


@dataclass(frozen=True)
class AFSMDef:
    """
    Adaptation finite-state machine

    Rule negations (!RuleName) are inlined once at construction; `resolved`
    maps each rule id to its evaluable predicate.
    """
    name: str
    rules: Tuple[Rule, ...]
    initial: ContextState = INITIAL_STATE
    resolved: Dict[str, Predicate] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        ids = [r.id for r in self.rules]
        names = [r.name for r in self.rules]
        if len(set(ids)) != len(ids):
            raise AfsmError(f"{self.name}: duplicate rule ids")
        if len(set(names)) != len(names):
            raise AfsmError(f"{self.name}: duplicate rule names")
        object.__setattr__(self, "resolved", _inline_negations(self.rules))

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def predicate_of(self, rule: Rule) -> Predicate:
        return self.resolved[rule.id]

    @property
    def rule_ids(self) -> Tuple[str, ...]:
        return tuple(r.id for r in self.rules)


@dataclass(frozen=True)
class StepResult:
    new_state: ContextState
    fired: Optional[str] = None
    output: Optional[Output] = None
    conflicts: Tuple[str, ...] = ()


def _inline_negations(rules: Iterable[Rule]) -> Dict[str, Predicate]:
    by_name = {r.name: r for r in rules}
    resolved: Dict[str, Predicate] = {}

    def inline(p: Predicate, visiting: Tuple[str, ...]) -> Predicate:
        if isinstance(p, RuleNegation):
            target = by_name.get(p.rule_name)
            if target is None:
                raise UnresolvedRuleRef(f"no rule named {p.rule_name!r}")
            if target.name in visiting:
                raise CyclicRuleRef(" -> ".join(visiting + (target.name,)))
            return Not(inline(target.predicate, visiting + (target.name,)))
        if isinstance(p, Not):
            return Not(inline(p.operand, visiting))
        if isinstance(p, And):
            return And(tuple(inline(o, visiting) for o in p.operands))
        if isinstance(p, Or):
            return Or(tuple(inline(o, visiting) for o in p.operands))
        return p

    for rule in by_name.values():
        resolved[rule.id] = inline(rule.predicate, (rule.name,))
    return resolved

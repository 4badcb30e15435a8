"""
Adaptation finite-state machines for the PhoneAdapter ContextManagers
Rule tables, predicate evaluation, stepping and offline analysis
"""

from .predicates import (
    AfsmError, UnresolvedRuleRef, CyclicRuleRef, PredicateSyntaxError,
    GpsIsValid, GpsLocationIs, GpsSpeedGt, BtConnected, BtCountGte, TimeGte, TimeRef,
    Not, And, Or, RuleNegation, Predicate, eval_predicate, parse_predicate, sensors_of,
)
from .model import AFSMDef, ContextState, Output, Rule, StepResult, INITIAL_STATE
from .machine import Conflict, enabled_rules, step, reachable_states, detect_conflicts, snapshot_grid
from .tables import TABLE_ALL_SENSORS, TABLE_NO_GPS, build_variant, variant_name
from .table_file import RuleFile, RuleFileError, parse_rules, load_rules, format_rules, diff_rules

__all__ = [
    "AfsmError",
    "UnresolvedRuleRef",
    "CyclicRuleRef",
    "PredicateSyntaxError",
    "GpsIsValid",
    "GpsLocationIs",
    "GpsSpeedGt",
    "BtConnected",
    "BtCountGte",
    "TimeGte",
    "TimeRef",
    "Not",
    "And",
    "Or",
    "RuleNegation",
    "Predicate",
    "eval_predicate",
    "parse_predicate",
    "sensors_of",
    "AFSMDef",
    "ContextState",
    "Output",
    "Rule",
    "StepResult",
    "INITIAL_STATE",
    "Conflict",
    "enabled_rules",
    "step",
    "reachable_states",
    "detect_conflicts",
    "snapshot_grid",
    "TABLE_ALL_SENSORS",
    "TABLE_NO_GPS",
    "build_variant",
    "variant_name",
    "RuleFile",
    "RuleFileError",
    "parse_rules",
    "load_rules",
    "format_rules",
    "diff_rules",
]

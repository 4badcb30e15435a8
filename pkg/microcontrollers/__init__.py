"""
PhoneAdapter micro-controllers
ContextManager / AdaptationManager variants, FailureManager, MetaController
and the ensemble that deploys them
"""

from .messages import Stage, TickSignal, NewContext, RuleChange
from .variants import (
    CMVariant, AMVariant,
    KNOWLEDGE_DESCRIPTOR, FAILURE_MANAGER_DESCRIPTOR, META_CONTROLLER_DESCRIPTOR,
)
from .errors import EnsembleError, OperationUnsupported
from .context_manager import ContextManager
from .adaptation_manager import AdaptationManager, GENERAL_OUTPUT
from .failure_manager import FailureManager, FailureRecord, FailureStatus, failure_key
from .meta_controller import (
    MetaRule, EnsembleConfig, MetaController, META_RULES_CM, META_RULES_AM,
    select_context_manager, select_adaptation_manager, context_rule, adaptation_rule,
    triggering_rules, all_health_states, config_map,
)
from .ensemble import Ensemble

__all__ = [
    "Stage",
    "TickSignal",
    "NewContext",
    "RuleChange",
    "CMVariant",
    "AMVariant",
    "KNOWLEDGE_DESCRIPTOR",
    "FAILURE_MANAGER_DESCRIPTOR",
    "META_CONTROLLER_DESCRIPTOR",
    "ContextManager",
    "EnsembleError",
    "OperationUnsupported",
    "AdaptationManager",
    "GENERAL_OUTPUT",
    "FailureManager",
    "FailureRecord",
    "FailureStatus",
    "failure_key",
    "MetaRule",
    "EnsembleConfig",
    "MetaController",
    "META_RULES_CM",
    "META_RULES_AM",
    "select_context_manager",
    "select_adaptation_manager",
    "context_rule",
    "adaptation_rule",
    "triggering_rules",
    "all_health_states",
    "config_map",
    "Ensemble",
]

"""tankmate: a rule-based stocking advisor for ornamental aquariums."""

from .advisor import (
    AdvisorConfig,
    ConsultationError,
    ConsultationResult,
    EliminationRecord,
    PairScore,
    SuggestionGroup,
    adjusted_pair_cf,
    base_cf,
    default_rules,
    filter_by_conditions,
    run_consultation,
    suggest_groups,
    whatif_add,
)
from .cf import cf_combine, cf_conjunction
from .engine import EngineError, Fact, RunResult, Trace, WorkingMemory, run
from .explain import ExplainError, ExplanationNode, explain
from .kb import (
    CfModifier,
    CompatLevel,
    CompatibilityMatrix,
    FishProfile,
    KbError,
    KnowledgeBase,
    ProfileSet,
    TankFieldError,
    TankState,
    load_compatibility,
    load_kb,
    load_modifiers,
    load_profiles,
    tank_from_dict,
    validate_kb,
    validate_tank,
)
from .rulelang import (
    RuleAst,
    RuleSemanticError,
    RuleSet,
    RuleSyntaxError,
    parse_rules,
    render_rule,
    render_rules,
    tokenize,
)

__version__ = "0.1.0"

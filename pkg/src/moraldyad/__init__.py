"""moraldyad: a deterministic dyadic moral-judgment engine.

Scenarios parse into a dyadic graph, pass through perception adjustment,
completion, compression, and per-dyad psychological operators, and come out as
traced wrongness judgments scoped by a culture profile. A policy linter
detects conflicting obligations over the same graphs.
"""

from .dsl import (
    ParseError,
    Scenario,
    ScenarioParseError,
    parse_scenario,
    serialize_graph,
    serialize_scenario,
)
from .engine import ValidationFailure,explain, export_judgment, judge, score_dyad
from .model import (
    Classification,
    CultureProfile,
    DyadicGraph,
    DyadRecord,
    EntityKind,
    EntityNode,
    HarmEdge,
    InferenceMode,
    Judgment,
    LockMode,
    TraceStep,
    snapshot,
    validate_graph,
)
from .normalize import (
    ChainDecomposition,
    Role,
    agentic_reduction,
    collapse_group,
    complete_dyad,
    decompose_chain,
    fractional_attribution,
)
from .operators import (
    AppraisalResult,
    IntentPosterior,
    TypecastResult,
    appraise_counterfactual,
    infer_intent_bayes,
    infer_intent_heuristic,
    typecast,
)
from .policy import ConflictReport, ObligationEdge, detect_conflicts, plan_resolution
from .profiles import (
    FixturePerceptionProvider,
    HttpPerceptionProvider,
    PerceptionProvider,
    apply_group_adjustments,
    fixture_perceive,
    load_profile,
)

__version__ = "0.1.0"

__all__ = [
    "AppraisalResult",
    "ChainDecomposition",
    "Classification",
    "ConflictReport",
    "CultureProfile",
    "DyadRecord",
    "DyadicGraph",
    "EntityKind",
    "EntityNode",
    "FixturePerceptionProvider",
    "HarmEdge",
    "HttpPerceptionProvider",
    "InferenceMode",
    "IntentPosterior",
    "Judgment",
    "LockMode",
    "ObligationEdge",
    "ParseError",
    "PerceptionProvider",
    "Role",
    "Scenario",
    "ScenarioParseError",
    "TraceStep",
    "TypecastResult",
    "ValidationFailure",
    "agentic_reduction",
    "appraise_counterfactual",
    "apply_group_adjustments",
    "collapse_group",
    "complete_dyad",
    "decompose_chain",
    "detect_conflicts",
    "explain",
    "export_judgment",
    "fixture_perceive",
    "fractional_attribution",
    "infer_intent_bayes",
    "infer_intent_heuristic",
    "judge",
    "load_profile",
    "parse_scenario",
    "plan_resolution",
    "score_dyad",
    "serialize_graph",
    "serialize_scenario",
    "snapshot",
    "typecast",
    "validate_graph",
]

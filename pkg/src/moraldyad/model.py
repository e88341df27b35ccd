"""Core domain types: the dyadic graph IR, culture profiles, and judgment records.

Every pass in the engine consumes and produces these values. All types are
immutable after construction; passes return new graphs rather than mutating.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any, Optional


class EntityKind(Enum):
    INDIVIDUAL = "individual"
    GROUP = "group"
    INSTITUTION = "institution"
    DIFFUSE = "diffuse"
    SYSTEM = "system"
    SUPERNATURAL = "supernatural"


# Kinds reserved for nodes invented by the completion pass (or declared latent).
SYNTHETIC_KINDS = frozenset({EntityKind.DIFFUSE, EntityKind.SYSTEM, EntityKind.SUPERNATURAL})


class LockMode(Enum):
    NONE = "none"
    LOCKED_AGENT = "locked_agent"
    LOCKED_PATIENT = "locked_patient"


class InferenceMode(Enum):
    HEURISTIC = "heuristic"
    BAYESIAN = "bayesian"


class GroupAggregation(Enum):
    """How member perception values combine into a collapsed group node."""

    MAX = "max"
    MEAN = "mean"


class Classification(Enum):
    WRONG = "wrong"
    TRAGEDY = "tragedy"
    NEUTRAL = "neutral"
    COMPLEX = "complex"


@dataclass(frozen=True)
class EntityNode:
    """A perceived mind: something that can intend (agent side) or suffer (patient side)."""

    id: str
    kind: EntityKind = EntityKind.INDIVIDUAL
    intentionality: float = 0.5  # capacity for planning and intentional action, [0, 1]
    vulnerability: float = 0.5   # capacity for suffering and experience, [0, 1]
    group_size: int = 1
    entitativity: float = 0.0    # perceived cohesion of a collective, [0, 1]
    members: tuple[str, ...] = ()
    latent: bool = False         # candidate for promotion by the completion pass
    lock: LockMode = LockMode.NONE
    community: Optional[str] = None


@dataclass(frozen=True)
class HarmEdge:
    """A directed agent -> patient action. Endpoints may be missing (None) before completion."""

    id: str
    agent_id: Optional[str]
    patient_id: Optional[str]
    causality: float = 1.0             # perceived causal strength of the action, [0, 1]
    valence: float = -1.0              # outcome sign: negative = bad, positive = good
    suffering: float = 0.0             # observed outcome magnitude, [0, 1]
    exogenous_sufficiency: float = 0.0  # chance the outcome occurs even with intent removed
    act_category: str = ""             # keys the per-act weight map of a profile


@dataclass(frozen=True)
class PassRecord:
    """Provenance marker: a pass that has been applied, plus any entities it invented."""

    pass_name: str
    created_entities: tuple[str, ...] = ()


@dataclass(frozen=True)
class DyadicGraph:
    """The IR every pass rewrites: entities, directed harm edges, optional causal chain."""

    entities: tuple[EntityNode, ...] = ()
    edges: tuple[HarmEdge, ...] = ()
    chain_order: Optional[tuple[str, ...]] = None
    provenance: tuple[PassRecord, ...] = ()
    allow_system_agents: bool = True  # scenarios may mark systemic agents inadmissible

    @cached_property
    def entity_map(self) -> dict[str, EntityNode]:
        return {e.id: e for e in self.entities}

    @cached_property
    def edge_map(self) -> dict[str, HarmEdge]:
        return {e.id: e for e in self.edges}

    def entity(self, entity_id: str) -> EntityNode:
        return self.entity_map[entity_id]

    def edge(self, edge_id: str) -> HarmEdge:
        return self.edge_map[edge_id]

    def completion_created(self) -> frozenset[str]:
        """Ids of entities invented by passes, per provenance."""
        created: set[str] = set()
        for record in self.provenance:
            created.update(record.created_entities)
        return frozenset(created)

    def with_entity(self, node: EntityNode) -> "DyadicGraph":
        """Return a graph with `node` added or replaced, preserving insertion order."""
        if node.id in self.entity_map:
            entities = tuple(node if e.id == node.id else e for e in self.entities)
        else:
            entities = self.entities + (node,)
        return replace(self, entities=entities)

    def with_edge(self, edge: HarmEdge) -> "DyadicGraph":
        if edge.id in self.edge_map:
            edges = tuple(edge if e.id == edge.id else e for e in self.edges)
        else:
            edges = self.edges + (edge,)
        return replace(self, edges=edges)

    def with_provenance(self, record: PassRecord) -> "DyadicGraph":
        return replace(self, provenance=self.provenance + (record,))


@dataclass(frozen=True)
class CultureProfile:
    """All community-scoped parameters consumed by the judgment pipeline."""

    name: str = "neutral"
    k_map: tuple[tuple[str, float], ...] = ()  # act category -> weight; categories absent here weigh 1.0
    alpha: float = 1.0                  # outrage exponent, > 0
    sigma_t: float = 0.0                # typecasting sensitivity, [0, 1]
    delta_p_ingroup: float = 0.0        # vulnerability boost for in-group entities
    delta_a_outgroup: float = 0.0       # intentionality boost for out-group entities
    knobe_gain: float = 0.0             # strength of valence-dependent intent inference
    default_diffuse_p: float = 0.5      # vulnerability of an invented diffuse patient
    default_system_a: float = 0.5       # intentionality of an invented systemic agent
    tool_threshold: float = 0.3         # intermediaries below this intentionality collapse out of chains
    tie_epsilon: float = 0.05           # half-width of the typecasting complexity band, > 0
    tragedy_threshold: float = 0.5      # exogenous sufficiency at or above this reclassifies as tragedy
    observer_community: Optional[str] = None
    inference_mode: InferenceMode = InferenceMode.HEURISTIC
    bayes_background: float = 0.1       # accident rate with intent absent, [0, 1)
    bayes_grid: tuple[float, ...] = (0.0, 0.5, 1.0)
    group_aggregation: GroupAggregation = GroupAggregation.MAX

    def weight_for(self, act_category: str) -> float:
        for category, weight in self.k_map:
            if category == act_category:
                return weight
        return 1.0


@dataclass(frozen=True)
class TraceStep:
    """One replayable pipeline event: what pass touched what, with value snapshots."""

    pass_name: str
    target: str
    before: tuple[tuple[str, Any], ...]
    after: tuple[tuple[str, Any], ...]
    note: str = ""


def step(pass_name: str, target: str, before: dict[str, Any], after: dict[str, Any],
         note: str = "") -> TraceStep:
    """Build a TraceStep from plain dicts (stored as ordered tuples for hashability)."""
    return TraceStep(pass_name, target, tuple(before.items()), tuple(after.items()), note)


@dataclass(frozen=True)
class AttributionRecord:
    """Per-member share of a collapsed group endpoint's value and wrongness."""

    entity_id: str
    group_size: int
    entitativity: float
    effective_size: float
    per_member_value: float
    per_member_wrongness: float


@dataclass(frozen=True)
class DyadRecord:
    """Final scored values for one dyad."""

    edge_id: str
    agent_id: str
    patient_id: str
    act_category: str
    a_final: float
    p_final: float
    h: float
    s: float
    k: float
    wrongness: float
    classification: Classification
    agent_attribution: Optional[AttributionRecord] = None
    patient_attribution: Optional[AttributionRecord] = None


@dataclass(frozen=True)
class Judgment:
    dyad_records: tuple[DyadRecord, ...]
    total_wrongness: float
    trace: tuple[TraceStep, ...]


@dataclass(frozen=True)
class Violation:
    """One broken invariant, named, with the offending id."""

    invariant: str
    offender: str
    message: str


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _in_unit(x: float) -> bool:
    return 0.0 <= x <= 1.0


def validate_graph(graph: DyadicGraph) -> list[Violation]:
    """Check every type invariant; an empty report means the graph is well formed.

    Violations are data, not faults: malformed graphs are reported, never raised.
    Missing (None) edge endpoints are legal before completion and are not violations;
    endpoints naming entities that do not exist are.
    """
    violations: list[Violation] = []
    seen_entity_ids: set[str] = set()
    invented = graph.completion_created()

    for node in graph.entities:
        if node.id in seen_entity_ids:
            violations.append(Violation("unique-entity-id", node.id, f"duplicate entity id {node.id!r}"))
        seen_entity_ids.add(node.id)
        if not _in_unit(node.intentionality):
            violations.append(Violation("range", node.id,
                                         f"intentionality {node.intentionality} outside [0, 1]"))
        if not _in_unit(node.vulnerability):
            violations.append(Violation("range", node.id,
                                         f"vulnerability {node.vulnerability} outside [0, 1]"))
        if not _in_unit(node.entitativity):
            violations.append(Violation("range", node.id,
                                         f"entitativity {node.entitativity} outside [0, 1]"))
        if node.group_size < 1:
            violations.append(Violation("range", node.id, f"group_size {node.group_size} < 1"))
        if node.kind is EntityKind.INDIVIDUAL and (node.group_size != 1 or node.members):
            violations.append(Violation("individual-shape", node.id,
                                         "individual must have group_size 1 and no members"))
        if node.kind not in (EntityKind.GROUP, EntityKind.INSTITUTION) and node.members:
            violations.append(Violation("members-kind", node.id,
                                         f"{node.kind.value} entity cannot list members"))
        if node.kind is EntityKind.GROUP and not node.members:
            # Institutions may be memberless (ungrounded); plain groups may not.
            violations.append(Violation("members-kind", node.id, "group must list members"))
        if node.kind in SYNTHETIC_KINDS and not node.latent and node.id not in invented:
            violations.append(Violation("synthetic-kind", node.id,
                                         f"kind {node.kind.value!r} requires latent or completion provenance"))

    entity_ids = {e.id for e in graph.entities}
    for node in graph.entities:
        for member in node.members:
            if member not in entity_ids:
                violations.append(Violation("referential-integrity", node.id,
                                             f"member {member!r} does not exist"))

    seen_edge_ids: set[str] = set()
    for edge in graph.edges:
        if edge.id in seen_edge_ids:
            violations.append(Violation("unique-edge-id", edge.id, f"duplicate edge id {edge.id!r}"))
        seen_edge_ids.add(edge.id)
        for role, ref in (("agent", edge.agent_id), ("patient", edge.patient_id)):
            if ref is not None and ref not in entity_ids:
                violations.append(Violation("referential-integrity", edge.id,
                                             f"{role} {ref!r} does not exist"))
        if not _in_unit(edge.causality):
            violations.append(Violation("range", edge.id, f"causality {edge.causality} outside [0, 1]"))
        if not -1.0 <= edge.valence <= 1.0:
            violations.append(Violation("range", edge.id, f"valence {edge.valence} outside [-1, 1]"))
        if not _in_unit(edge.suffering):
            violations.append(Violation("range", edge.id, f"suffering {edge.suffering} outside [0, 1]"))
        if not _in_unit(edge.exogenous_sufficiency):
            violations.append(Violation("range", edge.id,
                                         f"exogenous_sufficiency {edge.exogenous_sufficiency} outside [0, 1]"))

    if graph.chain_order is not None:
        edge_ids = {e.id for e in graph.edges}
        for eid in graph.chain_order:
            if eid not in edge_ids:
                violations.append(Violation("referential-integrity", eid,
                                             f"chain references unknown edge {eid!r}"))
        resolvable = [graph.edge_map[eid] for eid in graph.chain_order if eid in edge_ids]
        for first, second in zip(resolvable, resolvable[1:]):
            if first.patient_id is None or first.patient_id != second.agent_id:
                violations.append(Violation("chain-adjacency", second.id,
                                             f"chain edge {second.id!r} does not start at "
                                             f"patient of {first.id!r}"))

    return violations


def validate_profile(profile: CultureProfile) -> list[Violation]:
    """Invariant check for culture profiles, mirroring validate_graph's report style."""
    violations: list[Violation] = []
    if profile.alpha <= 0:
        violations.append(Violation("range", "alpha", f"alpha {profile.alpha} must be > 0"))
    for category, weight in profile.k_map:
        if weight <= 0:
            violations.append(Violation("range", f"k_map[{category}]", f"weight {weight} must be > 0"))
    for name in ("sigma_t", "delta_p_ingroup", "delta_a_outgroup", "knobe_gain",
                 "default_diffuse_p", "default_system_a", "tool_threshold", "tragedy_threshold"):
        value = getattr(profile, name)
        if not _in_unit(value):
            violations.append(Violation("range", name, f"{name} {value} outside [0, 1]"))
    if profile.tie_epsilon <= 0:
        violations.append(Violation("range", "tie_epsilon", f"tie_epsilon {profile.tie_epsilon} must be > 0"))
    if not 0.0 <= profile.bayes_background < 1.0:
        violations.append(Violation("range", "bayes_background",
                                     f"bayes_background {profile.bayes_background} outside [0, 1)"))
    if not profile.bayes_grid:
        violations.append(Violation("bayes-grid", "bayes_grid", "bayes_grid must be nonempty"))
    else:
        for level in profile.bayes_grid:
            if not _in_unit(level):
                violations.append(Violation("range", "bayes_grid", f"grid level {level} outside [0, 1]"))
        if any(b <= a for a, b in zip(profile.bayes_grid, profile.bayes_grid[1:])):
            violations.append(Violation("bayes-grid", "bayes_grid", "bayes_grid must be strictly increasing"))
    return violations


# ---------------------------------------------------------------------------
# Canonical snapshots
# ---------------------------------------------------------------------------

def _entity_canonical(node: EntityNode) -> dict[str, Any]:
    return {
        "id": node.id,
        "kind": node.kind.value,
        "intentionality": node.intentionality,
        "vulnerability": node.vulnerability,
        "group_size": node.group_size,
        "entitativity": node.entitativity,
        "members": sorted(node.members),
        "latent": node.latent,
        "lock": node.lock.value,
        "community": node.community,
    }


def _edge_canonical(edge: HarmEdge) -> dict[str, Any]:
    return {
        "id": edge.id,
        "agent_id": edge.agent_id,
        "patient_id": edge.patient_id,
        "causality": edge.causality,
        "valence": edge.valence,
        "suffering": edge.suffering,
        "exogenous_sufficiency": edge.exogenous_sufficiency,
        "act_category": edge.act_category,
    }


def snapshot(graph: DyadicGraph) -> str:
    """Canonical value snapshot of a graph's semantic content.

    Stable under entity/edge reordering and sensitive to any value change.
    Provenance is metadata, not content, and is excluded so that a re-applied
    idempotent pass yields a snapshot-equal graph.
    """
    canonical = {
        "entities": sorted((_entity_canonical(e) for e in graph.entities), key=lambda d: d["id"]),
        "edges": sorted((_edge_canonical(e) for e in graph.edges), key=lambda d: d["id"]),
        "chain_order": list(graph.chain_order) if graph.chain_order is not None else None,
        "allow_system_agents": graph.allow_system_agents,
    }
    return json.dumps(canonical, sort_keys=True, separators=(",", ":"))


def snapshots_equal(a: DyadicGraph, b: DyadicGraph) -> bool:
    return snapshot(a) == snapshot(b)

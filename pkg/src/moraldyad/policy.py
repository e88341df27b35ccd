"""Policy obligation model and conflict detection.

Obligations are demands placed on an agent entity (promote or prevent an
action toward a patient). Three conflict classes are detected over all
obligation pairs, each reported with a wrongness-ranked priority list and an
ordered resolution plan.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .model import CultureProfile, DyadicGraph, EntityNode


class Direction(Enum):
    PROMOTE = "promote"
    PREVENT = "prevent"


class AgencyRequirement(Enum):
    NONE = "none"
    LOW = "low"
    HIGH = "high"


class ConflictKind(Enum):
    BOTTLENECK = "bottleneck"
    AUTHORITY_PARADOX = "authority_paradox"
    STAKEHOLDER_INTERSECTION = "stakeholder_intersection"


class ResolutionKind(Enum):
    SEQUENTIAL_STAGING = "sequential_staging"
    INTERMEDIARY_INSERTION = "intermediary_insertion"
    PRECOMMITMENT_COMMUNICATION = "precommitment_communication"


@dataclass(frozen=True)
class ObligationEdge:
    """One demanded action: <agent> must promote/prevent <action_tag> toward <patient>.

    Two obligations sharing an action_tag with opposite directions are declared
    mutually unsatisfiable.
    """

    id: str
    policy_id: str
    agent_id: str
    patient_id: str
    direction: Direction
    action_tag: str
    demanded_by: Optional[str] = None
    agency_requirement: AgencyRequirement = AgencyRequirement.NONE


@dataclass(frozen=True)
class PriorityEntry:
    obligation_id: str
    wrongness: float


@dataclass(frozen=True)
class ResolutionStep:
    kind: ResolutionKind
    params: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class ConflictReport:
    kind: ConflictKind
    obligations: tuple[str, ...]           # >= 2 obligation ids, pair order as detected
    priority: tuple[PriorityEntry, ...]    # sorted by wrongness desc, ties by id asc
    plan: tuple[ResolutionStep, ...]


class ObligationReferenceError(ValueError):
    """An obligation names an entity absent from the scenario graph."""


# Review node inserted by the intermediary-insertion strategy.
REVIEW_NODE_ID = "review"


def _check_references(obligations: list[ObligationEdge] | tuple[ObligationEdge, ...],
                      graph: DyadicGraph) -> None:
    ids = {e.id for e in graph.entities}
    for ob in obligations:
        for label, ref in (("agent", ob.agent_id), ("patient", ob.patient_id),
                           ("demanded_by", ob.demanded_by)):
            if ref is not None and ref not in ids:
                raise ObligationReferenceError(
                    f"obligation {ob.id!r}: {label} {ref!r} does not exist")


def obligation_wrongness(ob: ObligationEdge, graph: DyadicGraph,
                         profile: CultureProfile) -> float:
    """Wrongness of the dyad an obligation implies, at full causal strength.

    Obligations carry no causality of their own; the implied dyad is scored
    with causality 1.0 and the action tag keying the profile's weight map.
    """
    from .engine import score_dyad

    agent: EntityNode = graph.entity(ob.agent_id)
    patient: EntityNode = graph.entity(ob.patient_id)
    k = profile.weight_for(ob.action_tag)
    return score_dyad(agent.intentionality, patient.vulnerability, 1.0, k, profile.alpha)


def _priority_list(pair: tuple[ObligationEdge, ObligationEdge], graph: DyadicGraph,
                   profile: CultureProfile) -> tuple[PriorityEntry, ...]:
    entries = [PriorityEntry(ob.id, obligation_wrongness(ob, graph, profile)) for ob in pair]
    entries.sort(key=lambda e: (-e.wrongness, e.obligation_id))
    return tuple(entries)


def _classify_pair(a: ObligationEdge, b: ObligationEdge) -> list[ConflictKind]:
    """All conflict classes a pair falls into, in canonical kind order."""
    kinds: list[ConflictKind] = []
    if a.agent_id != b.agent_id:
        return kinds
    if a.action_tag == b.action_tag and a.direction is not b.direction:
        kinds.append(ConflictKind.BOTTLENECK)
    requirements = {a.agency_requirement, b.agency_requirement}
    if requirements == {AgencyRequirement.LOW, AgencyRequirement.HIGH}:
        kinds.append(ConflictKind.AUTHORITY_PARADOX)
    if (a.patient_id == b.patient_id and a.direction is not b.direction
            and a.demanded_by is not None and b.demanded_by is not None
            and a.demanded_by != b.demanded_by):
        kinds.append(ConflictKind.STAKEHOLDER_INTERSECTION)
    return kinds


def plan_resolution(kind: ConflictKind, priority: tuple[PriorityEntry, ...],
                    profile: CultureProfile) -> tuple[ResolutionStep, ...]:
    """Ordered resolution strategy for one conflict.

    Always stage sequentially by priority first; structural conflicts
    (bottleneck, authority paradox) additionally insert a review intermediary;
    every plan ends with pre-committed communication, modeled as raising the
    losing dyad's exogenous sufficiency to 1 so a later deviation appraises as
    non-malicious.
    """
    steps = [ResolutionStep(
        ResolutionKind.SEQUENTIAL_STAGING,
        (("order", tuple(entry.obligation_id for entry in priority)),),
    )]
    if kind in (ConflictKind.BOTTLENECK, ConflictKind.AUTHORITY_PARADOX):
        steps.append(ResolutionStep(
            ResolutionKind.INTERMEDIARY_INSERTION,
            (("review_node", REVIEW_NODE_ID),),
        ))
    loser = priority[-1].obligation_id
    steps.append(ResolutionStep(
        ResolutionKind.PRECOMMITMENT_COMMUNICATION,
        (("deviating_obligation", loser), ("exogenous_sufficiency", 1.0)),
    ))
    return tuple(steps)


def detect_conflicts(obligations: list[ObligationEdge] | tuple[ObligationEdge, ...],
                     graph: DyadicGraph, profile: CultureProfile) -> list[ConflictReport]:
    """Exhaustive pairwise detection of the three conflict classes.

    Reports are emitted in pair index order, then in canonical kind order for
    pairs that fall into more than one class.
    """
    _check_references(obligations, graph)
    reports: list[ConflictReport] = []
    obligations = list(obligations)
    for i, first in enumerate(obligations):
        for second in obligations[i + 1:]:
            kinds = _classify_pair(first, second)
            if not kinds:
                continue
            priority = _priority_list((first, second), graph, profile)
            for kind in kinds:
                reports.append(ConflictReport(
                    kind=kind,
                    obligations=(first.id, second.id),
                    priority=priority,
                    plan=plan_resolution(kind, priority, profile),
                ))
    return reports


def conflicts_to_dict(reports: list[ConflictReport]) -> dict:
    """Stable-field-order dict form of a lint result (same style as judgments)."""
    return {
        "conflicts": [
            {
                "kind": r.kind.value,
                "obligations": list(r.obligations),
                "priority": [
                    {"obligation_id": e.obligation_id, "wrongness": e.wrongness}
                    for e in r.priority
                ],
                "plan": [
                    {"step": s.kind.value, "params": {k: _plain(v) for k, v in s.params}}
                    for s in r.plan
                ],
            }
            for r in reports
        ],
    }


def _plain(value: object) -> object:
    if isinstance(value, tuple):
        return list(value)
    return value


def export_conflicts(reports: list[ConflictReport]) -> str:
    import json

    return json.dumps(conflicts_to_dict(reports), indent=2) + "\n"


def apply_precommitment(graph: DyadicGraph, agent_id: str, patient_id: str,
                        value: float = 1.0) -> DyadicGraph:
    """Annotate every matching edge with a pre-committed counterfactual.

    Raising exogenous sufficiency toward 1 makes a later deviation appraise as
    a tragedy rather than a mind-caused harm.
    """
    out = graph
    for edge in graph.edges:
        if edge.agent_id == agent_id and edge.patient_id == patient_id:
            if edge.exogenous_sufficiency < value:
                out = out.with_edge(replace(edge, exogenous_sufficiency=value))
    return out

"""Graph compression passes that squeeze arbitrary input toward dyadic form.

Four mechanisms: completion (fill missing agents/patients so every scored
observation is a closed dyad), group collapse with entitativity-weighted
dilution, agentic reduction of institutions to a high-agency proxy, and
sequential chain decomposition with instrument collapse of low-agency
intermediaries.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .model import (
    CultureProfile,
    DyadicGraph,
    EntityKind,
    EntityNode,
    GroupAggregation,
    HarmEdge,
    PassRecord,
    TraceStep,
    step,
)


class Role(Enum):
    AGENT = "agent"
    PATIENT = "patient"


@dataclass(frozen=True)
class AttributionShare:
    per_member: float
    effective_size: float


@dataclass(frozen=True)
class InstrumentCollapse:
    removed_id: str            # intermediary dropped from the chain
    rewritten_edge: HarmEdge   # direct edge spanning the removed node
    residual_blame: float      # the intermediary's own intentionality, kept for the record


@dataclass(frozen=True)
class ChainDecomposition:
    dyads: tuple[tuple[HarmEdge, int], ...]  # (edge, 1-based stage index)
    instrument_collapses: tuple[InstrumentCollapse, ...]


class MalformedChainError(ValueError):
    """Chain edges whose endpoints do not connect head to tail."""


def _unique_id(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    n = 2
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


# ---------------------------------------------------------------------------
# Completion
# ---------------------------------------------------------------------------

def complete_dyad(graph: DyadicGraph,
                  profile: CultureProfile) -> tuple[DyadicGraph, list[TraceStep]]:
    """Fill missing edge endpoints so every scored observation closes a dyad.

    Missing patients always gain one; missing agents only when there is
    positive suffering to explain. The fill order is: the lexicographically
    first latent entity if any exists, else an invented node (a diffuse
    "society" patient, a "system" agent, or a "fate" supernatural agent when
    the scenario marks systemic agents inadmissible). Invented nodes are shared
    across edges. Idempotent, and never removes user-declared nodes.
    """
    steps: list[TraceStep] = []
    created: list[str] = []
    out = graph
    taken = {e.id for e in graph.entities}

    latent_ids = sorted(e.id for e in graph.entities if e.latent)
    latent_pick = latent_ids[0] if latent_ids else None

    society_id: Optional[str] = None
    system_id: Optional[str] = None

    for edge in graph.edges:
        current = out.edge(edge.id)
        if current.patient_id is None:
            if latent_pick is not None:
                target, note = latent_pick, f"latent promotion of {latent_pick!r}"
            else:
                if society_id is None:
                    society_id = _unique_id("society", taken)
                    taken.add(society_id)
                    created.append(society_id)
                    node = EntityNode(id=society_id, kind=EntityKind.DIFFUSE,
                                      intentionality=0.0,
                                      vulnerability=profile.default_diffuse_p)
                    out = out.with_entity(node)
                    steps.append(step("completion", society_id, {},
                                      {"kind": node.kind.value,
                                       "vulnerability": node.vulnerability},
                                      "invented diffuse patient"))
                target, note = society_id, f"synthetic diffuse patient {society_id!r}"
            out = out.with_edge(replace(current, patient_id=target))
            steps.append(step("completion", current.id,
                              {"patient_id": None}, {"patient_id": target}, note))
        current = out.edge(edge.id)
        if current.agent_id is None and current.suffering > 0:
            if latent_pick is not None:
                target, note = latent_pick, f"latent promotion of {latent_pick!r}"
            else:
                if system_id is None:
                    if graph.allow_system_agents:
                        system_id = _unique_id("system", taken)
                        kind = EntityKind.SYSTEM
                        label = "invented systemic agent"
                    else:
                        system_id = _unique_id("fate", taken)
                        kind = EntityKind.SUPERNATURAL
                        label = "invented supernatural agent"
                    taken.add(system_id)
                    created.append(system_id)
                    node = EntityNode(id=system_id, kind=kind,
                                      intentionality=profile.default_system_a,
                                      vulnerability=0.0)
                    out = out.with_entity(node)
                    steps.append(step("completion", system_id, {},
                                      {"kind": node.kind.value,
                                       "intentionality": node.intentionality}, label))
                target, note = system_id, f"synthetic agent {system_id!r}"
            out = out.with_edge(replace(current, agent_id=target))
            steps.append(step("completion", current.id,
                              {"agent_id": None}, {"agent_id": target}, note))

    out = out.with_provenance(PassRecord("completion", tuple(created)))
    return out, steps


# ---------------------------------------------------------------------------
# Node collapse, dilution, agentic reduction
# ---------------------------------------------------------------------------

def _aggregate(values: list[float], mode: GroupAggregation) -> float:
    if mode is GroupAggregation.MEAN:
        return sum(values) / len(values)
    return max(values)


def collapse_group(members: list[EntityNode] | tuple[EntityNode, ...], entitativity: float,
                   role: Role, aggregation: GroupAggregation = GroupAggregation.MAX,
                   group_id: Optional[str] = None) -> EntityNode:
    """Fuse individual members into one group super-node.

    Both perception coordinates aggregate (max by default: a mob is as culpable
    as its worst member); `role` names which coordinate the caller will score.
    """
    if not members:
        raise ValueError("cannot collapse an empty member list")
    intentionality = _aggregate([m.intentionality for m in members], aggregation)
    vulnerability = _aggregate([m.vulnerability for m in members], aggregation)
    member_ids = tuple(sorted(m.id for m in members))
    return EntityNode(
        id=group_id if group_id is not None else "group:" + "+".join(member_ids),
        kind=EntityKind.GROUP,
        intentionality=intentionality,
        vulnerability=vulnerability,
        group_size=len(members),
        entitativity=entitativity,
        members=member_ids,
    )


def fractional_attribution(group: EntityNode, role: Role) -> AttributionShare:
    """Dilute the group value over members: per-member = value / n_eff with
    n_eff = 1 + (n - 1)(1 - entitativity).

    At entitativity 0 this is exact /n dilution; at 1 the group acts as a
    single undiluted mind.
    """
    n = group.group_size
    n_eff = 1.0 + (n - 1) * (1.0 - group.entitativity)
    value = group.intentionality if role is Role.AGENT else group.vulnerability
    return AttributionShare(per_member=value / n_eff, effective_size=n_eff)


def attribute_value(value: float, group_size: int, entitativity: float) -> AttributionShare:
    """Dilution of an arbitrary already-scored value over a collective."""
    n_eff = 1.0 + (group_size - 1) * (1.0 - entitativity)
    return AttributionShare(per_member=value / n_eff, effective_size=n_eff)


def agentic_reduction(institution: EntityNode, graph: DyadicGraph) -> Optional[str]:
    """Pick the single highest-agency member as the institution's proxy.

    Ties break lexicographically by id. Returns None when no members are
    listed: the moral edge is ungrounded and downstream wrongness attenuates.
    """
    if not institution.members:
        return None
    candidates = [graph.entity(mid) for mid in institution.members]
    candidates.sort(key=lambda e: (-e.intentionality, e.id))
    return candidates[0].id


def collapse_endpoints(graph: DyadicGraph,
                       profile: CultureProfile) -> tuple[DyadicGraph, list[TraceStep]]:
    """Rewrite group/institution edge endpoints to their collapsed values.

    Groups take aggregated member values. Institutions acting as agents take
    their proxy's intentionality (or stay ungrounded when memberless);
    memberless institutions acting as patients cannot suffer and get
    vulnerability zero.
    """
    steps: list[TraceStep] = []
    out = graph
    agent_ids = {e.agent_id for e in graph.edges if e.agent_id is not None}
    patient_ids = {e.patient_id for e in graph.edges if e.patient_id is not None}

    for node in graph.entities:
        if node.kind not in (EntityKind.GROUP, EntityKind.INSTITUTION):
            continue
        if node.id not in agent_ids and node.id not in patient_ids:
            continue
        updated = node

        if node.kind is EntityKind.GROUP:
            member_nodes = [graph.entity(mid) for mid in node.members]
            intentionality = _aggregate([m.intentionality for m in member_nodes],
                                        profile.group_aggregation)
            vulnerability = _aggregate([m.vulnerability for m in member_nodes],
                                       profile.group_aggregation)
            if (intentionality, vulnerability) != (node.intentionality, node.vulnerability):
                updated = replace(node, intentionality=intentionality,
                                  vulnerability=vulnerability)
                steps.append(step("group_collapse", node.id,
                                  {"intentionality": node.intentionality,
                                   "vulnerability": node.vulnerability},
                                  {"intentionality": intentionality,
                                   "vulnerability": vulnerability},
                                  f"{profile.group_aggregation.value} over "
                                  f"{len(member_nodes)} members"))
        else:
            if node.id in agent_ids:
                proxy = agentic_reduction(node, graph)
                if proxy is None:
                    steps.append(step("agentic_reduction", node.id,
                                      {"intentionality": node.intentionality},
                                      {"intentionality": updated.intentionality},
                                      "ungrounded: no member to blame"))
                else:
                    proxy_a = graph.entity(proxy).intentionality
                    if proxy_a != updated.intentionality:
                        updated = replace(updated, intentionality=proxy_a)
                    steps.append(step("agentic_reduction", node.id,
                                      {"intentionality": node.intentionality},
                                      {"intentionality": proxy_a},
                                      f"proxy {proxy!r}"))
            if node.id in patient_ids:
                if node.members:
                    member_nodes = [graph.entity(mid) for mid in node.members]
                    vulnerability = _aggregate([m.vulnerability for m in member_nodes],
                                               profile.group_aggregation)
                else:
                    vulnerability = 0.0
                if vulnerability != updated.vulnerability:
                    note = ("memberless institution cannot suffer"
                            if not node.members else
                            f"{profile.group_aggregation.value} over member vulnerability")
                    steps.append(step("agentic_reduction", node.id,
                                      {"vulnerability": updated.vulnerability},
                                      {"vulnerability": vulnerability}, note))
                    updated = replace(updated, vulnerability=vulnerability)

        if updated is not node:
            out = out.with_entity(updated)

    out = out.with_provenance(PassRecord("normalization"))
    return out, steps


# ---------------------------------------------------------------------------
# Sequential chains
# ---------------------------------------------------------------------------

def decompose_chain(graph: DyadicGraph,
                    profile: CultureProfile) -> tuple[ChainDecomposition, list[TraceStep]]:
    """Split a declared causal chain into sequential dyads, collapsing
    low-agency intermediaries into direct edges.

    An intermediary below the tool threshold is treated as a mere instrument:
    its flanking edges fuse into one edge whose causality is the product of the
    two, with outcome fields taken from the terminal edge, and the intermediary
    keeps only residual blame equal to its own intentionality.
    """
    if graph.chain_order is None:
        raise MalformedChainError("graph declares no chain")
    chain_edges = []
    for eid in graph.chain_order:
        if eid not in graph.edge_map:
            raise MalformedChainError(f"chain references unknown edge {eid!r}")
        chain_edges.append(graph.edge(eid))
    for first, second in zip(chain_edges, chain_edges[1:]):
        if first.patient_id is None or first.patient_id != second.agent_id:
            raise MalformedChainError(
                f"chain edge {second.id!r} does not start at the patient of {first.id!r}")

    steps: list[TraceStep] = []
    collapses: list[InstrumentCollapse] = []
    if not chain_edges:
        return ChainDecomposition((), ()), steps

    emitted: list[HarmEdge] = []
    pending = chain_edges[0]
    for nxt in chain_edges[1:]:
        intermediary = graph.entity(nxt.agent_id)
        if intermediary.intentionality < profile.tool_threshold:
            rewritten = HarmEdge(
                id=f"{pending.id}-via-{nxt.id}",
                agent_id=pending.agent_id,
                patient_id=nxt.patient_id,
                causality=pending.causality * nxt.causality,
                valence=nxt.valence,
                suffering=nxt.suffering,
                exogenous_sufficiency=nxt.exogenous_sufficiency,
                act_category=nxt.act_category,
            )
            collapses.append(InstrumentCollapse(
                removed_id=intermediary.id,
                rewritten_edge=rewritten,
                residual_blame=intermediary.intentionality,
            ))
            steps.append(step("chain_decomposition", intermediary.id,
                              {"intentionality": intermediary.intentionality},
                              {"residual_blame": intermediary.intentionality,
                               "rewritten_edge": rewritten.id},
                              "instrument collapse"))
            pending = rewritten
        else:
            emitted.append(pending)
            pending = nxt
    emitted.append(pending)

    dyads = tuple((edge, index) for index, edge in enumerate(emitted, start=1))
    for edge, index in dyads:
        steps.append(step("chain_decomposition", edge.id, {},
                          {"stage": index}, "sequential dyad"))
    return ChainDecomposition(dyads, tuple(collapses)), steps

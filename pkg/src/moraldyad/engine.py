"""Judgment pipeline: orchestrates the fixed pass order and scores each dyad.

Pipeline order (normative for reproducibility):

  1. in/out-group perception adjustment
  2. dyadic completion of missing endpoints
  3. group collapse and agentic reduction of group/institution endpoints
  4. chain decomposition (when a chain is declared)
  then per scored dyad:
  5. intent inference (heuristic boost or Bayesian update, per profile)
  6. counterfactual appraisal (tragedy reclassification and blame shift)
  7. typecasting projection of both endpoint entities
  8. wrongness scoring W = k * (A * P * H) ** alpha

Judging is deterministic: identical inputs yield byte-identical exports.
"""
from __future__ import annotations

import json
from typing import Any, Optional

from .dsl import format_number
from .model import (
    AttributionRecord,
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
    Violation,
    step,
    validate_graph,
    validate_profile,
)
from .normalize import (
    attribute_value,
    collapse_endpoints,
    complete_dyad,
    decompose_chain,
)
from .operators import (
    AppraisalClass,
    appraise_counterfactual,
    infer_intent_bayes,
    infer_intent_heuristic,
    proximity_prior,
    typecast,
)
from .profiles import apply_group_adjustments


class ValidationFailure(ValueError):
    """Input graph or profile violates its invariants; judging refuses to start."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(f"{v.invariant}({v.offender}): {v.message}"
                                   for v in violations))


def score_dyad(intentionality: float, vulnerability: float, causality: float,
               k: float, alpha: float) -> float:
    """W = k * (A * P * H) ** alpha; zero whenever any factor is zero."""
    return k * (intentionality * vulnerability * causality) ** alpha


def judge(graph: DyadicGraph, profile: CultureProfile) -> Judgment:
    """Run the full pipeline over a validated graph and emit a traced judgment."""
    graph_violations = validate_graph(graph)
    if graph_violations:
        raise ValidationFailure(graph_violations)
    profile_violations = validate_profile(profile)
    if profile_violations:
        raise ValidationFailure(profile_violations)

    trace: list[TraceStep] = []
    work, steps = apply_group_adjustments(graph, profile)
    trace.extend(steps)
    work, steps = complete_dyad(work, profile)
    trace.extend(steps)
    work, steps = collapse_endpoints(work, profile)
    trace.extend(steps)

    chain_member_ids: set[str] = set()
    chain_dyads: list[HarmEdge] = []
    if work.chain_order:
        decomposition, steps = decompose_chain(work, profile)
        trace.extend(steps)
        chain_member_ids = set(work.chain_order)
        chain_dyads = [edge for edge, _stage in decomposition.dyads]

    scored: list[HarmEdge] = []
    chain_inserted = False
    for edge in work.edges:
        if edge.id in chain_member_ids:
            if not chain_inserted:
                scored.extend(chain_dyads)
                chain_inserted = True
        else:
            scored.append(edge)

    system_id = _designate_system_agent(work)
    records: list[DyadRecord] = []
    for edge in scored:
        record = _score_edge(work, profile, edge, system_id, trace)
        if record is not None:
            records.append(record)

    total = sum(r.wrongness for r in records)
    return Judgment(tuple(records), total, tuple(trace))


def _designate_system_agent(graph: DyadicGraph) -> str:
    """Id a tragedy reassignment points blame at: the first systemic entity in
    the graph, or a fresh designation when none exists."""
    system_nodes = sorted(e.id for e in graph.entities if e.kind is EntityKind.SYSTEM)
    if system_nodes:
        return system_nodes[0]
    taken = {e.id for e in graph.entities}
    candidate = "system"
    n = 2
    while candidate in taken:
        candidate = f"system_{n}"
        n += 1
    return candidate


def _score_edge(graph: DyadicGraph, profile: CultureProfile, edge: HarmEdge,
                system_id: str, trace: list[TraceStep]) -> Optional[DyadRecord]:
    if edge.agent_id is None:
        # Only reachable for a zero-suffering observation with no agent:
        # nothing to explain, nothing to score.
        trace.append(step("scoring", edge.id, {}, {},
                          "unscored: no agent and zero suffering"))
        return None
    agent = graph.entity(edge.agent_id)
    patient = graph.entity(edge.patient_id)
    self_directed = edge.agent_id == edge.patient_id

    # Stage 5: intent inference.
    declared_a = agent.intentionality
    if profile.inference_mode is InferenceMode.HEURISTIC:
        inferred_a = infer_intent_heuristic(declared_a, edge.suffering, edge.valence,
                                            profile.knobe_gain)
        mode_note = "heuristic"
    else:
        prior = proximity_prior(profile.bayes_grid, declared_a)
        observed = edge.suffering > 0 and edge.valence < 0
        posterior = infer_intent_bayes(prior, observed, edge.causality,
                                       profile.bayes_background)
        inferred_a = posterior.point_estimate
        mode_note = "bayesian" if observed else "bayesian (no suffering observed)"
    trace.append(step("intent_inference", edge.id,
                      {"intentionality": declared_a},
                      {"intentionality": inferred_a}, mode_note))

    # Stage 6: counterfactual appraisal.
    appraisal = appraise_counterfactual(edge, profile.tragedy_threshold)
    is_tragedy = appraisal.classification is AppraisalClass.TRAGEDY
    if is_tragedy:
        appraised_a = profile.default_system_a
        trace.append(step("moral_appraisal", edge.id,
                          {"intentionality": inferred_a,
                           "exogenous_sufficiency": edge.exogenous_sufficiency},
                          {"intentionality": appraised_a, "classification": "tragedy",
                           "reassigned_agent": system_id},
                          "would have happened anyway"))
    else:
        appraised_a = inferred_a
        trace.append(step("moral_appraisal", edge.id,
                          {"intentionality": inferred_a,
                           "exogenous_sufficiency": edge.exogenous_sufficiency},
                          {"intentionality": appraised_a, "classification": "mind_caused"},
                          "intent was necessary"))

    # Stage 7: typecasting of both endpoint entities.
    if is_tragedy:
        agent_side_id = system_id
        agent_pair = (appraised_a, 0.0)
        agent_lock = LockMode.NONE
    else:
        agent_side_id = agent.id
        agent_pair = (appraised_a, agent.vulnerability)
        agent_lock = agent.lock
    agent_cast = typecast(agent_pair[0], agent_pair[1], profile.sigma_t, agent_lock,
                          profile.tie_epsilon)
    trace.append(step("typecasting", agent_side_id,
                      {"intentionality": agent_pair[0], "vulnerability": agent_pair[1]},
                      {"intentionality": agent_cast.intentionality_out,
                       "vulnerability": agent_cast.vulnerability_out,
                       "complexity": agent_cast.complexity_flag,
                       "suppressed": agent_cast.suppressed_dimension.value},
                      f"dyad {edge.id} agent side"))
    patient_cast = typecast(patient.intentionality, patient.vulnerability, profile.sigma_t,
                            patient.lock, profile.tie_epsilon)
    trace.append(step("typecasting", patient.id,
                      {"intentionality": patient.intentionality,
                       "vulnerability": patient.vulnerability},
                      {"intentionality": patient_cast.intentionality_out,
                       "vulnerability": patient_cast.vulnerability_out,
                       "complexity": patient_cast.complexity_flag,
                       "suppressed": patient_cast.suppressed_dimension.value},
                      f"dyad {edge.id} patient side"))

    # A flickering side passes its own values through (TypecastResult invariant);
    # the other side's projection still applies, keeping W monotone in causality.
    is_complex = agent_cast.complexity_flag or patient_cast.complexity_flag
    final_a = agent_cast.intentionality_out
    final_p = patient_cast.vulnerability_out

    # Stage 8: scoring.
    k = profile.weight_for(edge.act_category)
    attenuation = 1.0
    if (not is_tragedy and agent.kind is EntityKind.INSTITUTION and not agent.members):
        attenuation = profile.default_system_a
    wrongness = score_dyad(final_a, final_p, edge.causality, k, profile.alpha) * attenuation

    if is_tragedy:
        classification = Classification.TRAGEDY
    elif is_complex:
        classification = Classification.COMPLEX
    elif wrongness == 0.0:
        classification = Classification.NEUTRAL
    else:
        classification = Classification.WRONG

    agent_attr = None
    if not is_tragedy and agent.kind in (EntityKind.GROUP, EntityKind.INSTITUTION):
        agent_attr = _attribution(agent, final_a,
                                  score_base=(final_p, edge.causality, k, profile.alpha,
                                              attenuation), side="agent")
        trace.append(step("fractional_attribution", edge.id,
                          {"value": final_a, "group_size": agent.group_size,
                           "entitativity": agent.entitativity},
                          {"effective_size": agent_attr.effective_size,
                           "per_member": agent_attr.per_member_value},
                          "agent side"))
    patient_attr = None
    if patient.kind in (EntityKind.GROUP, EntityKind.INSTITUTION):
        patient_attr = _attribution(patient, final_p,
                                    score_base=(final_a, edge.causality, k, profile.alpha,
                                                attenuation), side="patient")
        trace.append(step("fractional_attribution", edge.id,
                          {"value": final_p, "group_size": patient.group_size,
                           "entitativity": patient.entitativity},
                          {"effective_size": patient_attr.effective_size,
                           "per_member": patient_attr.per_member_value},
                          "patient side"))

    note = classification.value
    if self_directed:
        note += "; self-directed edge"
    trace.append(step("scoring", edge.id,
                      {"intentionality": final_a, "vulnerability": final_p,
                       "causality": edge.causality, "weight": k,
                       "exponent": profile.alpha, "attenuation": attenuation},
                      {"wrongness": wrongness}, note))

    return DyadRecord(
        edge_id=edge.id,
        agent_id=agent_side_id,
        patient_id=patient.id,
        act_category=edge.act_category,
        a_final=final_a,
        p_final=final_p,
        h=edge.causality,
        s=edge.suffering,
        k=k,
        wrongness=wrongness,
        classification=classification,
        agent_attribution=agent_attr,
        patient_attribution=patient_attr,
    )


def _attribution(node: EntityNode, final_value: float,
                 score_base: tuple[float, float, float, float, float],
                 side: str) -> AttributionRecord:
    other, causality, k, alpha, attenuation = score_base
    share = attribute_value(final_value, node.group_size, node.entitativity)
    if side == "agent":
        per_w = score_dyad(share.per_member, other, causality, k, alpha) * attenuation
    else:
        per_w = score_dyad(other, share.per_member, causality, k, alpha) * attenuation
    return AttributionRecord(
        entity_id=node.id,
        group_size=node.group_size,
        entitativity=node.entitativity,
        effective_size=share.effective_size,
        per_member_value=share.per_member,
        per_member_wrongness=per_w,
    )


# ---------------------------------------------------------------------------
# Export and explanation
# ---------------------------------------------------------------------------

def _attribution_dict(attr: Optional[AttributionRecord]) -> Optional[dict[str, Any]]:
    if attr is None:
        return None
    return {
        "entity_id": attr.entity_id,
        "group_size": attr.group_size,
        "entitativity": attr.entitativity,
        "effective_size": attr.effective_size,
        "per_member_value": attr.per_member_value,
        "per_member_wrongness": attr.per_member_wrongness,
    }


def judgment_to_dict(judgment: Judgment) -> dict[str, Any]:
    """Stable-field-order dict form of a judgment (the export schema)."""
    return {
        "records": [
            {
                "edge_id": r.edge_id,
                "agent_id": r.agent_id,
                "patient_id": r.patient_id,
                "act_category": r.act_category,
                "a_final": r.a_final,
                "p_final": r.p_final,
                "h": r.h,
                "s": r.s,
                "k": r.k,
                "wrongness": r.wrongness,
                "classification": r.classification.value,
                "agent_attribution": _attribution_dict(r.agent_attribution),
                "patient_attribution": _attribution_dict(r.patient_attribution),
            }
            for r in judgment.dyad_records
        ],
        "total_wrongness": judgment.total_wrongness,
        "trace": [
            {
                "pass": s.pass_name,
                "target": s.target,
                "before": dict(s.before),
                "after": dict(s.after),
                "note": s.note,
            }
            for s in judgment.trace
        ],
    }


def export_judgment(judgment: Judgment, fmt: str = "json") -> str:
    """Render a judgment in a documented, byte-stable export format.

    "json" is the full structured export (records, total, trace); "tsv" is a
    delimited per-dyad table without the trace.
    """
    if fmt == "json":
        return json.dumps(judgment_to_dict(judgment), indent=2) + "\n"
    if fmt == "tsv":
        columns = ["edge_id", "agent_id", "patient_id", "act_category", "a_final",
                   "p_final", "h", "s", "k", "wrongness", "classification"]
        lines = ["\t".join(columns)]
        for r in judgment.dyad_records:
            lines.append("\t".join([
                r.edge_id, r.agent_id, r.patient_id, r.act_category,
                format_number(r.a_final), format_number(r.p_final), format_number(r.h),
                format_number(r.s), format_number(r.k), format_number(r.wrongness),
                r.classification.value,
            ]))
        lines.append(f"total\t{format_number(judgment.total_wrongness)}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {fmt!r}")


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, int):
        return str(value)
    return str(value)


def explain(judgment: Judgment) -> str:
    """Human-readable rendering of every trace step, in order, byte-stable."""
    lines = ["MORAL JUDGMENT", f"total wrongness: {format_number(judgment.total_wrongness)}"]
    if judgment.dyad_records:
        lines.append("dyads:")
        for r in judgment.dyad_records:
            lines.append(
                f"  {r.edge_id}: {r.agent_id} -> {r.patient_id}"
                f"  W={format_number(r.wrongness)} [{r.classification.value}]"
                f" (A={format_number(r.a_final)} P={format_number(r.p_final)}"
                f" H={format_number(r.h)})")
    if judgment.trace:
        lines.append("trace:")
        for index, s in enumerate(judgment.trace, start=1):
            before = ", ".join(f"{k}={_format_value(v)}" for k, v in s.before)
            after = ", ".join(f"{k}={_format_value(v)}" for k, v in s.after)
            suffix = f"  # {s.note}" if s.note else ""
            lines.append(f"  {index:3d}. [{s.pass_name}] {s.target}: "
                         f"{{{before}}} -> {{{after}}}{suffix}")
    return "\n".join(lines) + "\n"

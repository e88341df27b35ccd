"""Seeded random generators shared by unit and acceptance tests."""
from __future__ import annotations

import random

from moraldyad.model import (
    CultureProfile,
    DyadicGraph,
    EntityKind,
    EntityNode,
    GroupAggregation,
    HarmEdge,
    InferenceMode,
    LockMode,
)

COMMUNITIES = (None, "west", "east")
CATEGORIES = ("", "theft", "taboo")


def random_profile(rng: random.Random, mode: InferenceMode | None = None) -> CultureProfile:
    grid_size = rng.randint(2, 5)
    cuts = sorted(rng.sample(range(101), grid_size))
    grid = tuple(c / 100 for c in cuts)
    k_entries = tuple(sorted(
        (cat, rng.uniform(0.2, 3.0)) for cat in CATEGORIES[1:] if rng.random() < 0.5))
    return CultureProfile(
        name="random",
        k_map=k_entries,
        alpha=rng.uniform(0.2, 3.0),
        sigma_t=rng.random(),
        delta_p_ingroup=rng.random(),
        delta_a_outgroup=rng.random(),
        knobe_gain=rng.random(),
        default_diffuse_p=rng.random(),
        default_system_a=rng.random(),
        tool_threshold=rng.random(),
        tie_epsilon=rng.uniform(0.01, 0.2),
        tragedy_threshold=rng.random(),
        observer_community=rng.choice(COMMUNITIES),
        inference_mode=mode if mode is not None else rng.choice(list(InferenceMode)),
        bayes_background=rng.uniform(0.0, 0.9),
        bayes_grid=grid,
        group_aggregation=rng.choice(list(GroupAggregation)),
    )


def random_individual(rng: random.Random, entity_id: str,
                      community_pool=COMMUNITIES) -> EntityNode:
    return EntityNode(
        id=entity_id,
        kind=EntityKind.INDIVIDUAL,
        intentionality=rng.random(),
        vulnerability=rng.random(),
        latent=rng.random() < 0.2,
        lock=rng.choice(list(LockMode)),
        community=rng.choice(community_pool),
    )


def random_edge(rng: random.Random, edge_id: str, agent_id, patient_id) -> HarmEdge:
    return HarmEdge(
        id=edge_id,
        agent_id=agent_id,
        patient_id=patient_id,
        causality=rng.random(),
        valence=rng.uniform(-1.0, 1.0),
        suffering=rng.random(),
        exogenous_sufficiency=rng.random(),
        act_category=rng.choice(CATEGORIES),
    )


def random_individual_graph(rng: random.Random, max_entities: int = 3,
                            max_edges: int = 2, allow_missing: bool = True) -> DyadicGraph:
    """Small valid graph of individuals, optionally with missing endpoints."""
    n_entities = rng.randint(1, max_entities)
    entities = tuple(random_individual(rng, f"n{i}") for i in range(n_entities))
    ids = [e.id for e in entities]
    edges = []
    for j in range(rng.randint(0, max_edges)):
        agent = rng.choice(ids + [None]) if allow_missing else rng.choice(ids)
        patient = rng.choice(ids + [None]) if allow_missing else rng.choice(ids)
        edges.append(random_edge(rng, f"e{j}", agent, patient))
    return DyadicGraph(entities=entities, edges=tuple(edges),
                       allow_system_agents=rng.random() < 0.8)


def random_partial_graph(rng: random.Random) -> DyadicGraph:
    """Graph with deliberately missing endpoints for completion testing."""
    n_entities = rng.randint(1, 4)
    entities = tuple(random_individual(rng, f"n{i}") for i in range(n_entities))
    ids = [e.id for e in entities]
    edges = []
    for j in range(rng.randint(1, 4)):
        agent = rng.choice(ids + [None, None])
        patient = rng.choice(ids + [None, None])
        edges.append(random_edge(rng, f"e{j}", agent, patient))
    return DyadicGraph(entities=entities, edges=tuple(edges),
                       allow_system_agents=rng.random() < 0.7)

import random
from dataclasses import replace

from moraldyad.model import (
    DyadicGraph,
    EntityKind,
    EntityNode,
    HarmEdge,
    PassRecord,
    snapshot,
    validate_graph,
)

from genutil import random_individual_graph


def two_node_graph() -> DyadicGraph:
    return DyadicGraph(
        entities=(
            EntityNode(id="a", intentionality=0.9, vulnerability=0.2),
            EntityNode(id="p", intentionality=0.1, vulnerability=0.8),
        ),
        edges=(HarmEdge(id="e1", agent_id="a", patient_id="p", suffering=0.5),),
    )


def test_well_formed_graph_has_empty_report():
    assert validate_graph(two_node_graph()) == []


def test_edge_to_missing_entity_is_reported():
    graph = two_node_graph()
    graph = replace(graph, edges=(replace(graph.edges[0], patient_id="ghost"),))
    report = validate_graph(graph)
    assert len(report) == 1
    assert report[0].invariant == "referential-integrity"
    assert "ghost" in report[0].message


def test_out_of_range_intentionality_is_reported():
    graph = two_node_graph()
    bad = replace(graph.entities[0], intentionality=1.3)
    graph = replace(graph, entities=(bad, graph.entities[1]))
    report = validate_graph(graph)
    assert len(report) == 1
    assert report[0].invariant == "range"
    assert report[0].offender == "a"


def test_missing_endpoint_is_not_a_violation():
    graph = two_node_graph()
    graph = replace(graph, edges=(replace(graph.edges[0], patient_id=None),))
    assert validate_graph(graph) == []


def test_individual_with_members_is_reported():
    node = EntityNode(id="x", members=("a",))
    graph = DyadicGraph(entities=(node, EntityNode(id="a")))
    invariants = {v.invariant for v in validate_graph(graph)}
    assert "individual-shape" in invariants


def test_group_without_members_is_reported():
    graph = DyadicGraph(entities=(EntityNode(id="g", kind=EntityKind.GROUP, group_size=3),))
    invariants = {v.invariant for v in validate_graph(graph)}
    assert "members-kind" in invariants


def test_synthetic_kind_requires_latent_or_provenance():
    bare = DyadicGraph(entities=(EntityNode(id="s", kind=EntityKind.SYSTEM),))
    assert any(v.invariant == "synthetic-kind" for v in validate_graph(bare))

    latent = DyadicGraph(entities=(EntityNode(id="s", kind=EntityKind.SYSTEM, latent=True),))
    assert validate_graph(latent) == []

    invented = DyadicGraph(
        entities=(EntityNode(id="s", kind=EntityKind.SYSTEM),),
        provenance=(PassRecord("completion", ("s",)),),
    )
    assert validate_graph(invented) == []


def test_chain_adjacency_checked():
    graph = DyadicGraph(
        entities=(EntityNode(id="x"), EntityNode(id="y"), EntityNode(id="z")),
        edges=(
            HarmEdge(id="e1", agent_id="x", patient_id="y"),
            HarmEdge(id="e2", agent_id="x", patient_id="z"),
        ),
        chain_order=("e1", "e2"),
    )
    assert any(v.invariant == "chain-adjacency" for v in validate_graph(graph))


def test_snapshot_deterministic():
    graph = two_node_graph()
    assert snapshot(graph) == snapshot(two_node_graph())


def test_snapshot_order_independent():
    graph = two_node_graph()
    flipped = replace(graph, entities=tuple(reversed(graph.entities)))
    assert snapshot(graph) == snapshot(flipped)


def test_snapshot_sensitive_to_value_change():
    graph = two_node_graph()
    changed = replace(graph, entities=(
        replace(graph.entities[0], intentionality=0.91), graph.entities[1]))
    assert snapshot(graph) != snapshot(changed)


def test_snapshot_ignores_provenance():
    graph = two_node_graph()
    stamped = graph.with_provenance(PassRecord("completion"))
    assert snapshot(graph) == snapshot(stamped)


def test_snapshot_shuffle_property():
    rng = random.Random(7)
    for _ in range(50):
        graph = random_individual_graph(rng, max_entities=5, max_edges=4)
        entities = list(graph.entities)
        edges = list(graph.edges)
        rng.shuffle(entities)
        rng.shuffle(edges)
        shuffled = replace(graph, entities=tuple(entities), edges=tuple(edges))
        assert snapshot(graph) == snapshot(shuffled)

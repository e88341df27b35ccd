import json
import random
import threading
import time
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from moraldyad.dsl import ErrorKind
from moraldyad.engine import judge, score_dyad
from moraldyad.model import (
    CultureProfile,
    DyadicGraph,
    EntityNode,
    GroupAggregation,
    HarmEdge,
    InferenceMode,
)
from moraldyad.profiles import (
    FixturePerceptionProvider,
    HttpPerceptionProvider,
    PerceptionProviderError,
    ProfileParseError,
    apply_group_adjustments,
    fixture_perceive,
    load_profile,
    serialize_profile,
)

from conftest import read_fixture


def errors_of(source: str):
    with pytest.raises(ProfileParseError) as exc:
        load_profile(source)
    return exc.value.errors


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def test_neutral_profile_defaults():
    profile = load_profile(read_fixture("profiles/neutral.profile"))
    assert profile.alpha == 1.0
    assert profile.sigma_t == 0.0
    assert profile.delta_p_ingroup == 0.0
    assert profile.delta_a_outgroup == 0.0
    assert profile.knobe_gain == 0.0
    assert profile.inference_mode is InferenceMode.HEURISTIC
    assert profile.group_aggregation is GroupAggregation.MAX
    assert profile.bayes_grid == (0.0, 0.5, 1.0)


def test_neutral_profile_reduces_to_bare_equation():
    profile = load_profile(read_fixture("profiles/neutral.profile"))
    graph = DyadicGraph(
        entities=(EntityNode(id="a", intentionality=0.6),
                  EntityNode(id="p", vulnerability=0.7)),
        edges=(HarmEdge(id="e1", agent_id="a", patient_id="p", causality=0.9,
                        suffering=0.4),),
    )
    judgment = judge(graph, profile)
    assert judgment.dyad_records[0].wrongness == score_dyad(0.6, 0.7, 0.9, 1.0, 1.0)


def test_negative_alpha_rejected():
    errors = errors_of("alpha: -1.0\n")
    assert any(e.kind is ErrorKind.RANGE for e in errors)


def test_unknown_key_named():
    errors = errors_of("outrage: 2.0\n")
    assert any(e.kind is ErrorKind.UNKNOWN_KEY and "outrage" in e.message for e in errors)


def test_k_map_scales_wrongness():
    profile = load_profile('k_map: { taboo: 3.0 }\n')
    assert profile.weight_for("taboo") == 3.0
    assert profile.weight_for("anything_else") == 1.0

    graph = DyadicGraph(
        entities=(EntityNode(id="a", intentionality=0.6),
                  EntityNode(id="p", vulnerability=0.7)),
        edges=(HarmEdge(id="t", agent_id="a", patient_id="p", act_category="taboo"),
               HarmEdge(id="n", agent_id="a", patient_id="p", act_category="theft")),
    )
    judgment = judge(graph, profile)
    taboo, theft = judgment.dyad_records
    assert taboo.wrongness == pytest.approx(3.0 * theft.wrongness, rel=1e-12)


def test_bad_k_and_grid_rejected():
    assert any(e.kind is ErrorKind.RANGE for e in errors_of("k_map: { theft: 0.0 }\n"))
    assert any(e.kind is ErrorKind.RANGE for e in errors_of("bayes_grid: [0.5, 0.5]\n"))
    assert any(e.kind is ErrorKind.RANGE for e in errors_of("bayes_grid: [0.2, 1.5]\n"))
    assert any(e.kind is ErrorKind.RANGE for e in errors_of("tie_epsilon: 0.0\n"))
    assert any(e.kind is ErrorKind.RANGE for e in errors_of("bayes_background: 1.0\n"))


def test_profile_round_trip():
    profile = load_profile(read_fixture("profiles/vigilant.profile"))
    again = load_profile(serialize_profile(profile))
    assert again == profile


# ---------------------------------------------------------------------------
# Group adjustments
# ---------------------------------------------------------------------------

def adjustment_graph():
    return DyadicGraph(entities=(
        EntityNode(id="kin", vulnerability=0.5, community="kinfolk"),
        EntityNode(id="rival", intentionality=0.9, community="rivals"),
        EntityNode(id="stranger", intentionality=0.4, vulnerability=0.4),
    ))


def test_ingroup_vulnerability_boost():
    profile = CultureProfile(observer_community="kinfolk", delta_p_ingroup=0.2)
    adjusted, steps = apply_group_adjustments(adjustment_graph(), profile)
    assert adjusted.entity("kin").vulnerability == pytest.approx(0.7, abs=1e-12)
    assert len(steps) == 1
    assert steps[0].target == "kin"


def test_outgroup_intentionality_clamped():
    profile = CultureProfile(observer_community="kinfolk", delta_a_outgroup=0.3)
    adjusted, _ = apply_group_adjustments(adjustment_graph(), profile)
    assert adjusted.entity("rival").intentionality == 1.0


def test_zero_deltas_leave_graph_unchanged():
    profile = CultureProfile(observer_community="kinfolk")
    graph = adjustment_graph()
    adjusted, steps = apply_group_adjustments(graph, profile)
    assert adjusted.entities == graph.entities
    assert steps == []


def test_untagged_entities_untouched():
    profile = CultureProfile(observer_community="kinfolk",
                             delta_p_ingroup=0.4, delta_a_outgroup=0.4)
    adjusted, _ = apply_group_adjustments(adjustment_graph(), profile)
    stranger = adjusted.entity("stranger")
    assert (stranger.intentionality, stranger.vulnerability) == (0.4, 0.4)


def test_outgroup_boost_monotone_in_delta():
    rng = random.Random(6)
    for _ in range(100):
        base = rng.random()
        graph = DyadicGraph(entities=(
            EntityNode(id="x", intentionality=base, community="other"),))
        deltas = sorted(rng.random() for _ in range(3))
        outputs = []
        for delta in deltas:
            profile = CultureProfile(observer_community="home", delta_a_outgroup=delta)
            adjusted, _ = apply_group_adjustments(graph, profile)
            value = adjusted.entity("x").intentionality
            assert 0.0 <= value <= 1.0
            outputs.append(value)
        assert outputs == sorted(outputs)


# ---------------------------------------------------------------------------
# Perception provider port
# ---------------------------------------------------------------------------

def test_fixture_perceive_table():
    assert fixture_perceive("rock") == (0.0, 0.0)
    a, p = fixture_perceive("adult human")
    assert a > 0 and p > 0
    assert fixture_perceive("something unheard of") == (0.5, 0.5)
    assert fixture_perceive("ROCK ") == (0.0, 0.0)  # normalization
    # contextual entry, then fallback to the context-free row
    assert fixture_perceive("ai assistant", "observer") == (0.9, 0.05)
    assert fixture_perceive("rock", "observer") == (0.0, 0.0)


def test_fixture_provider_deterministic():
    provider = FixturePerceptionProvider()
    for _ in range(3):
        assert provider.perceive("dog") == provider.perceive("dog")


class _Handler(BaseHTTPRequestHandler):
    behavior = "ok"

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        if self.behavior == "slow":
            time.sleep(1.0)
        if self.behavior == "error":
            self.send_response(500)
            self.end_headers()
            return
        if self.behavior == "garbage":
            body = b"not json"
        elif self.behavior == "out_of_range":
            body = json.dumps({"intentionality": 3.0, "vulnerability": 0.5}).encode()
        else:
            body = json.dumps({
                "intentionality": 0.25 if payload.get("context") else 0.75,
                "vulnerability": 0.5,
            }).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/perceive"
    server.shutdown()


def test_http_provider_round_trip(http_server):
    _Handler.behavior = "ok"
    provider = HttpPerceptionProvider(http_server)
    assert provider.perceive("dog") == (0.75, 0.5)
    assert provider.perceive("dog", "observer") == (0.25, 0.5)


def test_http_provider_error_statuses(http_server):
    provider = HttpPerceptionProvider(http_server, timeout=0.3)
    for behavior in ("error", "garbage", "out_of_range"):
        _Handler.behavior = behavior
        with pytest.raises(PerceptionProviderError):
            provider.perceive("dog")
    _Handler.behavior = "slow"
    with pytest.raises(PerceptionProviderError):
        provider.perceive("dog")
    _Handler.behavior = "ok"


def test_http_provider_connection_refused():
    provider = HttpPerceptionProvider("http://127.0.0.1:9/perceive", timeout=0.3)
    with pytest.raises(PerceptionProviderError):
        provider.perceive("dog")

"""Culture profile loading, in/out-group perception adjustment, and the
perception-provider port that stands in for mind perception of entities."""
from __future__ import annotations

import json
import urllib.error
import urllib.request
from dataclasses import replace
from typing import Any, Optional, Protocol

from .dsl import ErrorKind, ParseError, Token, _Parser, format_number, tokenize
from .model import (
    CultureProfile,
    DyadicGraph,
    GroupAggregation,
    InferenceMode,
    TraceStep,
    step,
    validate_profile,
)

PROFILE_KEYS = ("alpha", "sigma_t", "delta_p_ingroup", "delta_a_outgroup", "knobe_gain",
                "default_diffuse_p", "default_system_a", "tool_threshold", "tie_epsilon",
                "tragedy_threshold", "observer_community", "inference_mode",
                "bayes_background", "bayes_grid", "group_aggregation", "k_map")

_UNIT_KEYS = {"sigma_t", "delta_p_ingroup", "delta_a_outgroup", "knobe_gain",
              "default_diffuse_p", "default_system_a", "tool_threshold", "tragedy_threshold"}


class ProfileParseError(ValueError):
    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


def load_profile(source: str) -> CultureProfile:
    """Parse key-value profile text (same lexical rules as the scenario DSL).

    Unspecified fields take the documented neutral defaults; the returned
    profile always satisfies every CultureProfile invariant.
    """
    tokens, lex_errors = tokenize(source)
    parser = _Parser(tokens)
    parser.errors.extend(lex_errors)

    fields: dict[str, Any] = {}
    seen: set[str] = set()
    name: Optional[str] = None

    while parser.peek().kind != "EOF":
        tok = parser.peek()
        if tok.kind == "IDENT" and tok.text == "profile":
            parser.advance()
            name_tok = parser.peek()
            if name_tok.kind != "STRING":
                parser.error(name_tok, "profile name must be a quoted string")
                continue
            parser.advance()
            if name is not None:
                parser.error(name_tok, "duplicate profile header")
                continue
            name = name_tok.text
            continue
        key_tok = parser.expect_ident("profile key")
        if key_tok is None:
            parser.advance()
            continue
        if key_tok.text not in PROFILE_KEYS:
            parser.error(key_tok, f"unknown profile key {key_tok.text!r}", ErrorKind.UNKNOWN_KEY)
            # keep consuming ": value" so one bad key does not cascade
            if parser.peek().kind == "PUNCT" and parser.peek().text == ":":
                parser.advance()
                if parser.peek().kind == "PUNCT" and parser.peek().text == "{":
                    parser.parse_block(None, key_tok.text)
                else:
                    parser.parse_value()
            continue
        if key_tok.text in seen:
            parser.error(key_tok, f"duplicate profile key {key_tok.text!r}", ErrorKind.DUPLICATE_ID)
        seen.add(key_tok.text)
        if parser.expect_punct(":") is None:
            continue
        if key_tok.text == "k_map":
            pairs = parser.parse_block(None, "k_map")
            k_entries: list[tuple[str, float]] = []
            for category, (value, vtok) in pairs.items():
                if not isinstance(value, float):
                    parser.error(vtok, f"k_map weight for {category!r} must be a number")
                    continue
                if value <= 0:
                    parser.error(vtok, f"k_map weight for {category!r} must be > 0", ErrorKind.RANGE)
                    continue
                k_entries.append((category, value))
            fields["k_map"] = tuple(sorted(k_entries))
            continue
        value = parser.parse_value()
        if value is None:
            continue
        _assign_field(parser, key_tok, value, fields)

    if parser.errors:
        parser.errors.sort(key=lambda e: (e.line, e.column))
        raise ProfileParseError(parser.errors)

    profile = CultureProfile(name=name or "profile", **fields)
    violations = validate_profile(profile)
    if violations:
        raise ProfileParseError([ParseError(1, 1, f"{v.offender}: {v.message}", ErrorKind.RANGE)
                                 for v in violations])
    return profile


def _assign_field(parser: _Parser, key_tok: Token, pair: tuple[Any, Token],
                  fields: dict[str, Any]) -> None:
    key = key_tok.text
    value, vtok = pair
    if key in _UNIT_KEYS:
        if not isinstance(value, float):
            parser.error(vtok, f"{key} must be a number")
        elif not 0.0 <= value <= 1.0:
            parser.error(vtok, f"{key} {vtok.text} outside [0, 1]", ErrorKind.RANGE)
        else:
            fields[key] = value
    elif key == "alpha":
        if not isinstance(value, float):
            parser.error(vtok, "alpha must be a number")
        elif value <= 0:
            parser.error(vtok, f"alpha {vtok.text} must be > 0", ErrorKind.RANGE)
        else:
            fields[key] = value
    elif key == "tie_epsilon":
        if not isinstance(value, float):
            parser.error(vtok, "tie_epsilon must be a number")
        elif value <= 0:
            parser.error(vtok, f"tie_epsilon {vtok.text} must be > 0", ErrorKind.RANGE)
        else:
            fields[key] = value
    elif key == "bayes_background":
        if not isinstance(value, float):
            parser.error(vtok, "bayes_background must be a number")
        elif not 0.0 <= value < 1.0:
            parser.error(vtok, f"bayes_background {vtok.text} outside [0, 1)", ErrorKind.RANGE)
        else:
            fields[key] = value
    elif key == "bayes_grid":
        if not isinstance(value, list):
            parser.error(vtok, "bayes_grid must be a [list of levels]")
            return
        levels: list[float] = []
        ok = True
        for item, itok in value:
            if not isinstance(item, float):
                parser.error(itok, "bayes_grid entries must be numbers")
                ok = False
            elif not 0.0 <= item <= 1.0:
                parser.error(itok, f"bayes_grid level {itok.text} outside [0, 1]", ErrorKind.RANGE)
                ok = False
            else:
                levels.append(item)
        if ok and any(b <= a for a, b in zip(levels, levels[1:])):
            parser.error(vtok, "bayes_grid must be strictly increasing", ErrorKind.RANGE)
            ok = False
        if ok and not levels:
            parser.error(vtok, "bayes_grid must be nonempty", ErrorKind.RANGE)
            ok = False
        if ok:
            fields[key] = tuple(levels)
    elif key == "observer_community":
        if not isinstance(value, str):
            parser.error(vtok, "observer_community must be a word or string")
        else:
            fields[key] = value
    elif key == "inference_mode":
        try:
            fields[key] = InferenceMode(value if isinstance(value, str) else "")
        except ValueError:
            parser.error(vtok, f"unknown inference_mode {value!r}", ErrorKind.RANGE)
    elif key == "group_aggregation":
        try:
            fields[key] = GroupAggregation(value if isinstance(value, str) else "")
        except ValueError:
            parser.error(vtok, f"unknown group_aggregation {value!r}", ErrorKind.RANGE)


def serialize_profile(profile: CultureProfile) -> str:
    """Canonical dump with every field explicit, including defaulted ones."""
    lines = [f'profile "{profile.name}"']
    if profile.k_map:
        entries = ", ".join(f"{category}: {format_number(weight)}"
                            for category, weight in sorted(profile.k_map))
        lines.append("k_map: { " + entries + " }")
    else:
        lines.append("k_map: { }")
    lines.append(f"alpha: {format_number(profile.alpha)}")
    for key in ("sigma_t", "delta_p_ingroup", "delta_a_outgroup", "knobe_gain",
                "default_diffuse_p", "default_system_a", "tool_threshold", "tie_epsilon",
                "tragedy_threshold"):
        lines.append(f"{key}: {format_number(getattr(profile, key))}")
    if profile.observer_community is not None:
        lines.append(f'observer_community: "{profile.observer_community}"')
    lines.append(f"inference_mode: {profile.inference_mode.value}")
    lines.append(f"bayes_background: {format_number(profile.bayes_background)}")
    lines.append("bayes_grid: [" + ", ".join(format_number(x) for x in profile.bayes_grid) + "]")
    lines.append(f"group_aggregation: {profile.group_aggregation.value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# In/out-group perception adjustment (first pipeline stage)
# ---------------------------------------------------------------------------

def apply_group_adjustments(graph: DyadicGraph,
                            profile: CultureProfile) -> tuple[DyadicGraph, list[TraceStep]]:
    """Shift raw perceptions by community alignment, additively with clamping.

    In-group entities (community == observer's) gain vulnerability; entities of
    a differing, non-empty community gain intentionality; untagged entities are
    untouched. One trace step per entity whose values actually change.
    """
    steps: list[TraceStep] = []
    out = graph
    for node in graph.entities:
        if node.community is None:
            continue
        if node.community == profile.observer_community:
            adjusted = min(1.0, node.vulnerability + profile.delta_p_ingroup)
            if adjusted != node.vulnerability:
                out = out.with_entity(replace(node, vulnerability=adjusted))
                steps.append(step("group_adjustment", node.id,
                                  {"vulnerability": node.vulnerability},
                                  {"vulnerability": adjusted},
                                  "in-group vulnerability boost"))
        else:
            adjusted = min(1.0, node.intentionality + profile.delta_a_outgroup)
            if adjusted != node.intentionality:
                out = out.with_entity(replace(node, intentionality=adjusted))
                steps.append(step("group_adjustment", node.id,
                                  {"intentionality": node.intentionality},
                                  {"intentionality": adjusted},
                                  "out-group intentionality boost"))
    return out, steps


# ---------------------------------------------------------------------------
# Perception-provider port
# ---------------------------------------------------------------------------

class PerceptionProvider(Protocol):
    """Maps an entity description (plus optional persona context) to a
    deterministic (intentionality, vulnerability) pair in [0, 1]^2."""

    def perceive(self, description: str, context: Optional[str] = None) -> tuple[float, float]:
        ...


class PerceptionProviderError(RuntimeError):
    """Provider-side failure (timeout, bad status, malformed payload); distinct
    from parse errors so callers can tell data problems from transport ones."""


NEUTRAL_PERCEPTION = (0.5, 0.5)

# Bundled perception fixture: (descriptor, persona context) -> (intentionality, vulnerability).
PERCEPTION_FIXTURE: dict[tuple[str, Optional[str]], tuple[float, float]] = {
    ("rock", None): (0.0, 0.0),
    ("adult human", None): (0.85, 0.85),
    ("child", None): (0.35, 0.95),
    ("infant", None): (0.05, 1.0),
    ("dog", None): (0.45, 0.8),
    ("robot", None): (0.6, 0.1),
    ("ai assistant", None): (0.85, 0.05),
    ("corporation", None): (0.8, 0.1),
    ("government", None): (0.75, 0.2),
    ("deity", None): (1.0, 0.0),
    ("nature", None): (0.3, 0.6),
    ("environment", None): (0.1, 0.8),
    ("society", None): (0.2, 0.7),
    ("chief executive", None): (0.9, 0.3),
    # Persona-scoped variants: the same entity mind-perceived from a stakeholder seat.
    ("corporation", "impacted"): (0.9, 0.05),
    ("ai assistant", "impacted"): (0.95, 0.02),
    ("ai assistant", "implementer"): (0.6, 0.1),
    ("ai assistant", "observer"): (0.9, 0.05),
}


def fixture_perceive(description: str, context: Optional[str] = None) -> tuple[float, float]:
    """Deterministic table lookup; unknown keys return the neutral point.

    A contextual key falls back to the context-free entry before defaulting.
    """
    key = (description.strip().lower(), context)
    if key in PERCEPTION_FIXTURE:
        return PERCEPTION_FIXTURE[key]
    fallback = (key[0], None)
    if context is not None and fallback in PERCEPTION_FIXTURE:
        return PERCEPTION_FIXTURE[fallback]
    return NEUTRAL_PERCEPTION


class FixturePerceptionProvider:
    """The bundled, fully deterministic provider."""

    def perceive(self, description: str, context: Optional[str] = None) -> tuple[float, float]:
        return fixture_perceive(description, context)


class HttpPerceptionProvider:
    """Optional network adapter mirroring the fixture signature over HTTP.

    Request body: {"description": ..., "context": ...}; expected response:
    {"intentionality": x, "vulnerability": y}. Timeouts, non-2xx statuses, and
    malformed payloads raise PerceptionProviderError.
    """

    def __init__(self, endpoint: str, timeout: float = 5.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def perceive(self, description: str, context: Optional[str] = None) -> tuple[float, float]:
        body = json.dumps({"description": description, "context": context}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                if not 200 <= response.status < 300:
                    raise PerceptionProviderError(f"provider returned status {response.status}")
                payload = json.loads(response.read().decode("utf-8"))
        except PerceptionProviderError:
            raise
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise PerceptionProviderError(f"perception request failed: {exc}") from exc
        try:
            pair = (float(payload["intentionality"]), float(payload["vulnerability"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise PerceptionProviderError(f"malformed provider payload: {payload!r}") from exc
        if not (0.0 <= pair[0] <= 1.0 and 0.0 <= pair[1] <= 1.0):
            raise PerceptionProviderError(f"provider values out of range: {pair!r}")
        return pair

"""Scenario DSL: a line-oriented block format for dyadic graphs.

The grammar (documented bit-exactly in docs/dsl-reference.md):

    scenario "<name>"
    option <flag>
    entity <id> { key: value, ... }
    group <id> { members: [...], entitativity: e, ... }
    action <agent> -> <patient> { id: e1, causality: c, valence: v, ... }
    chain [e1, e2, ...]
    obligation <id> { agent:, patient:, direction:, tag:, demanded_by:, agency: }

`#` starts a comment; `?` stands for a missing edge endpoint, to be filled by
the completion pass. Parsing is total: malformed input yields positioned
ParseError values, never an exception from the grammar machinery itself.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Any, Optional

from .model import (
    DyadicGraph,
    EntityKind,
    EntityNode,
    HarmEdge,
    LockMode,
    PassRecord,
    SYNTHETIC_KINDS,
)
from .policy import AgencyRequirement, Direction, ObligationEdge


class ErrorKind(Enum):
    SYNTAX = "syntax"
    UNKNOWN_KEY = "unknown_key"
    RANGE = "range"
    DUPLICATE_ID = "duplicate_id"
    DANGLING_REFERENCE = "dangling_reference"


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    kind: ErrorKind

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.kind.value}: {self.message}"


class ScenarioParseError(ValueError):
    """Raised by parse_scenario when the source is rejected; carries all errors."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: DyadicGraph
    obligations: tuple[ObligationEdge, ...] = ()


# ---------------------------------------------------------------------------
# Lexer (shared with the profile format)
# ---------------------------------------------------------------------------

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")
_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUMBER, STRING, PUNCT, EOF
    text: str
    line: int
    column: int


def tokenize(source: str) -> tuple[list[Token], list[ParseError]]:
    """Split source into position-tagged tokens. Lexical errors are collected."""
    tokens: list[Token] = []
    errors: list[ParseError] = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == '"':
            end = source.find('"', i + 1)
            newline = source.find("\n", i + 1)
            if end == -1 or (newline != -1 and newline < end):
                errors.append(ParseError(line, col, "unterminated string literal", ErrorKind.SYNTAX))
                i = newline if newline != -1 else n
                continue
            tokens.append(Token("STRING", source[i + 1:end], line, col))
            col += end - i + 1
            i = end + 1
            continue
        if ch == "-" and source[i:i + 2] == "->":
            tokens.append(Token("PUNCT", "->", line, col))
            i += 2
            col += 2
            continue
        m = _NUMBER_RE.match(source, i)
        if m:
            tokens.append(Token("NUMBER", m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            tokens.append(Token("IDENT", m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        if ch in "{}[],:?":
            tokens.append(Token("PUNCT", ch, line, col))
            i += 1
            col += 1
            continue
        errors.append(ParseError(line, col, f"unexpected character {ch!r}", ErrorKind.SYNTAX))
        i += 1
        col += 1
    tokens.append(Token("EOF", "", line, col))
    return tokens, errors


# ---------------------------------------------------------------------------
# Block parsing
# ---------------------------------------------------------------------------

_TOP_KEYWORDS = {"scenario", "entity", "group", "action", "chain", "obligation", "option"}

_ENTITY_KEYS = {"kind", "intentionality", "vulnerability", "group_size", "entitativity",
                "members", "latent", "lock", "community", "synthetic"}
_ACTION_KEYS = {"id", "causality", "valence", "suffering", "exogenous", "category"}
_OBLIGATION_KEYS = {"agent", "patient", "direction", "tag", "demanded_by", "agency", "policy"}

_UNIT_FIELDS = {"intentionality", "vulnerability", "entitativity", "causality",
                "suffering", "exogenous"}


_RESERVED_WORDS = {"true", "false"}


class _Parser:
    """Recursive-descent parser over the token stream, with per-block recovery."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.errors: list[ParseError] = []

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, tok: Token, message: str, kind: ErrorKind = ErrorKind.SYNTAX) -> None:
        self.errors.append(ParseError(tok.line, tok.column, message, kind))

    def expect_punct(self, text: str) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text == text:
            return self.advance()
        self.error(tok, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return None

    def expect_ident(self, what: str) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == "IDENT":
            return self.advance()
        self.error(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
        return None

    def expect_name(self, what: str) -> Optional[Token]:
        """An identifier usable as an id: reserved words are rejected."""
        tok = self.expect_ident(what)
        if tok is not None and tok.text in _RESERVED_WORDS:
            self.error(tok, f"{tok.text!r} is a reserved word and cannot name {what}")
            return None
        return tok

    def skip_to_top_level(self) -> None:
        """Recovery: drop tokens until the next block keyword or EOF."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == "EOF":
                return
            if tok.kind == "PUNCT" and tok.text in "{[":
                depth += 1
            elif tok.kind == "PUNCT" and tok.text in "}]":
                depth = max(0, depth - 1)
            elif tok.kind == "IDENT" and tok.text in _TOP_KEYWORDS and depth == 0:
                return
            self.advance()

    def parse_value(self) -> Optional[tuple[Any, Token]]:
        """One value: number, bare word, quoted string, or a [list]."""
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return float(tok.text), tok
        if tok.kind == "STRING":
            self.advance()
            return tok.text, tok
        if tok.kind == "IDENT":
            self.advance()
            if tok.text == "true":
                return True, tok
            if tok.text == "false":
                return False, tok
            return tok.text, tok
        if tok.kind == "PUNCT" and tok.text == "[":
            self.advance()
            items: list[tuple[Any, Token]] = []
            while True:
                nxt = self.peek()
                if nxt.kind == "PUNCT" and nxt.text == "]":
                    self.advance()
                    return items, tok
                if nxt.kind == "EOF":
                    self.error(nxt, "unterminated list")
                    return items, tok
                value = self.parse_value()
                if value is None:
                    self.advance()
                    continue
                items.append(value)
                sep = self.peek()
                if sep.kind == "PUNCT" and sep.text == ",":
                    self.advance()
        self.error(tok, f"expected a value, found {tok.text or 'end of input'!r}")
        return None

    def parse_block(self, allowed: Optional[set[str]], context: str) -> dict[str, tuple[Any, Token]]:
        """A { key: value, ... } body. Keys outside `allowed` (None = accept any)
        are reported and skipped."""
        pairs: dict[str, tuple[Any, Token]] = {}
        if self.expect_punct("{") is None:
            return pairs
        while True:
            tok = self.peek()
            if tok.kind == "PUNCT" and tok.text == "}":
                self.advance()
                return pairs
            if tok.kind == "EOF":
                self.error(tok, f"unterminated {context} block")
                return pairs
            if tok.kind == "PUNCT" and tok.text == ",":
                self.advance()
                continue
            key_tok = self.expect_ident(f"{context} key")
            if key_tok is None:
                self.advance()
                continue
            if self.expect_punct(":") is None:
                continue
            value = self.parse_value()
            if value is None:
                continue
            if allowed is not None and key_tok.text not in allowed:
                self.error(key_tok, f"unknown {context} key {key_tok.text!r}", ErrorKind.UNKNOWN_KEY)
                continue
            if key_tok.text in pairs:
                self.error(key_tok, f"duplicate key {key_tok.text!r}", ErrorKind.DUPLICATE_ID)
                continue
            pairs[key_tok.text] = value


def _unit_range(parser: _Parser, name: str, pair: tuple[Any, Token]) -> Optional[float]:
    value, tok = pair
    if not isinstance(value, float):
        parser.error(tok, f"{name} must be a number")
        return None
    if not 0.0 <= value <= 1.0:
        parser.error(tok, f"{name} {tok.text} outside [0, 1]", ErrorKind.RANGE)
        return None
    return value


def _string_value(parser: _Parser, name: str, pair: tuple[Any, Token]) -> Optional[str]:
    value, tok = pair
    if not isinstance(value, str):
        parser.error(tok, f"{name} must be a word or string")
        return None
    return value


def _bool_value(parser: _Parser, name: str, pair: tuple[Any, Token]) -> Optional[bool]:
    value, tok = pair
    if not isinstance(value, bool):
        parser.error(tok, f"{name} must be true or false")
        return None
    return value


# ---------------------------------------------------------------------------
# parse_scenario
# ---------------------------------------------------------------------------

@dataclass
class _PendingEdge:
    edge: HarmEdge
    line: int
    column: int
    suffering_given: bool


def parse_scenario(source: str) -> Scenario:
    """Parse scenario text into a Scenario; raise ScenarioParseError on any error.

    On success the returned graph passes validate_graph with an empty report.
    """
    tokens, errors = tokenize(source)
    parser = _Parser(tokens)
    parser.errors.extend(errors)

    name: Optional[str] = None
    entities: list[EntityNode] = []
    entity_positions: dict[str, Token] = {}
    declared_synthetic: list[str] = []
    pending_edges: list[_PendingEdge] = []
    edge_ids: dict[str, Token] = {}
    member_refs: list[tuple[str, Token, str]] = []  # (referenced id, token, owner)
    chain: Optional[list[tuple[str, Token]]] = None
    obligations: list[ObligationEdge] = []
    obligation_ids: dict[str, Token] = {}
    obligation_refs: list[tuple[str, Token, str]] = []
    allow_system_agents = True
    action_counter = 0

    if parser.peek().kind == "EOF" and not parser.errors:
        raise ScenarioParseError([ParseError(1, 1, "no scenario declared", ErrorKind.SYNTAX)])

    while parser.peek().kind != "EOF":
        tok = parser.peek()
        if tok.kind != "IDENT" or tok.text not in _TOP_KEYWORDS:
            parser.error(tok, f"expected a block keyword, found {tok.text or tok.kind!r}")
            parser.advance()
            parser.skip_to_top_level()
            continue
        keyword = parser.advance().text

        if keyword == "scenario":
            name_tok = parser.peek()
            if name_tok.kind != "STRING":
                parser.error(name_tok, "scenario name must be a quoted string")
                parser.skip_to_top_level()
                continue
            parser.advance()
            if name is not None:
                parser.error(name_tok, "duplicate scenario header")
                continue
            name = name_tok.text

        elif keyword == "option":
            flag_tok = parser.expect_ident("option name")
            if flag_tok is None:
                parser.skip_to_top_level()
                continue
            if flag_tok.text == "no_system_agents":
                allow_system_agents = False
            else:
                parser.error(flag_tok, f"unknown option {flag_tok.text!r}", ErrorKind.UNKNOWN_KEY)

        elif keyword in ("entity", "group"):
            id_tok = parser.expect_name("entity id")
            if id_tok is None:
                parser.skip_to_top_level()
                continue
            pairs = parser.parse_block(_ENTITY_KEYS, "entity")
            node = _build_entity(parser, keyword, id_tok, pairs, member_refs, declared_synthetic)
            if node is None:
                continue
            if node.id in entity_positions:
                parser.error(id_tok, f"duplicate entity id {node.id!r}", ErrorKind.DUPLICATE_ID)
                continue
            entity_positions[node.id] = id_tok
            entities.append(node)

        elif keyword == "action":
            action_counter += 1
            agent = _parse_endpoint(parser)
            if parser.expect_punct("->") is None:
                parser.skip_to_top_level()
                continue
            patient = _parse_endpoint(parser)
            pairs = {}
            if parser.peek().kind == "PUNCT" and parser.peek().text == "{":
                pairs = parser.parse_block(_ACTION_KEYS, "action")
            pending = _build_edge(parser, tok, action_counter, agent, patient, pairs)
            if pending is None:
                continue
            if pending.edge.id in edge_ids:
                parser.error(Token("IDENT", pending.edge.id, pending.line, pending.column),
                             f"duplicate edge id {pending.edge.id!r}", ErrorKind.DUPLICATE_ID)
                continue
            edge_ids[pending.edge.id] = Token("IDENT", pending.edge.id, pending.line, pending.column)
            pending_edges.append(pending)

        elif keyword == "chain":
            if chain is not None:
                parser.error(tok, "duplicate chain declaration")
                parser.skip_to_top_level()
                continue
            chain_tok = tok
            value = parser.parse_value()
            if value is None or not isinstance(value[0], list):
                parser.error(tok, "chain expects a [list of edge ids]")
                parser.skip_to_top_level()
                continue
            chain = []
            for item, item_tok in value[0]:
                if not isinstance(item, str):
                    parser.error(item_tok, "chain entries must be edge ids")
                    continue
                chain.append((item, item_tok))

        elif keyword == "obligation":
            id_tok = parser.expect_name("obligation id")
            if id_tok is None:
                parser.skip_to_top_level()
                continue
            pairs = parser.parse_block(_OBLIGATION_KEYS, "obligation")
            ob = _build_obligation(parser, id_tok, pairs, obligation_refs)
            if ob is None:
                continue
            if ob.id in obligation_ids:
                parser.error(id_tok, f"duplicate obligation id {ob.id!r}", ErrorKind.DUPLICATE_ID)
                continue
            obligation_ids[ob.id] = id_tok
            obligations.append(ob)

    if name is None and not any("scenario" in e.message for e in parser.errors):
        first = tokens[0]
        parser.errors.append(ParseError(first.line, first.column,
                                        "missing scenario header", ErrorKind.SYNTAX))

    # Deferred reference checks (forward references are legal).
    entity_id_set = set(entity_positions)
    for ref, ref_tok, owner in member_refs:
        if ref not in entity_id_set:
            parser.error(ref_tok, f"{owner} member {ref!r} is not declared",
                         ErrorKind.DANGLING_REFERENCE)
    for pending in pending_edges:
        for role, ref in (("agent", pending.edge.agent_id), ("patient", pending.edge.patient_id)):
            if ref is not None and ref not in entity_id_set:
                parser.errors.append(ParseError(
                    pending.line, pending.column,
                    f"action {role} {ref!r} is not declared", ErrorKind.DANGLING_REFERENCE))
    for ref, ref_tok, owner in obligation_refs:
        if ref not in entity_id_set:
            parser.error(ref_tok, f"obligation {owner} {ref!r} is not declared",
                         ErrorKind.DANGLING_REFERENCE)

    entity_lookup = {e.id: e for e in entities}
    edges: list[HarmEdge] = []
    for pending in pending_edges:
        edge = pending.edge
        if not pending.suffering_given:
            patient = entity_lookup.get(edge.patient_id) if edge.patient_id else None
            patient_p = patient.vulnerability if patient is not None else 0.5
            edge = HarmEdge(
                id=edge.id, agent_id=edge.agent_id, patient_id=edge.patient_id,
                causality=edge.causality, valence=edge.valence,
                suffering=edge.causality * patient_p,
                exogenous_sufficiency=edge.exogenous_sufficiency,
                act_category=edge.act_category,
            )
        edges.append(edge)

    chain_order: Optional[tuple[str, ...]] = None
    if chain is not None:
        edge_lookup = {e.id: e for e in edges}
        resolved: list[str] = []
        for eid, eid_tok in chain:
            if eid not in edge_lookup:
                parser.error(eid_tok, f"chain references unknown edge {eid!r}",
                             ErrorKind.DANGLING_REFERENCE)
            else:
                resolved.append(eid)
        for first_id, second_id in zip(resolved, resolved[1:]):
            first, second = edge_lookup[first_id], edge_lookup[second_id]
            if first.patient_id is None or first.patient_id != second.agent_id:
                parser.errors.append(ParseError(
                    chain_tok.line, chain_tok.column,
                    f"chain edge {second_id!r} does not start at the patient "
                    f"of {first_id!r}", ErrorKind.SYNTAX))
        chain_order = tuple(resolved)

    if parser.errors:
        parser.errors.sort(key=lambda e: (e.line, e.column))
        raise ScenarioParseError(parser.errors)

    provenance: tuple[PassRecord, ...] = ()
    if declared_synthetic:
        provenance = (PassRecord("declared_synthetic", tuple(declared_synthetic)),)
    graph = DyadicGraph(
        entities=tuple(entities),
        edges=tuple(edges),
        chain_order=chain_order,
        provenance=provenance,
        allow_system_agents=allow_system_agents,
    )
    return Scenario(name=name or "", graph=graph, obligations=tuple(obligations))


def _parse_endpoint(parser: _Parser) -> Optional[str]:
    tok = parser.peek()
    if tok.kind == "PUNCT" and tok.text == "?":
        parser.advance()
        return None
    ident = parser.expect_name("entity id or '?'")
    return ident.text if ident is not None else None


def _build_entity(parser: _Parser, keyword: str, id_tok: Token,
                  pairs: dict[str, tuple[Any, Token]],
                  member_refs: list[tuple[str, Token, str]],
                  declared_synthetic: list[str]) -> Optional[EntityNode]:
    kind = EntityKind.GROUP if keyword == "group" else EntityKind.INDIVIDUAL
    if "kind" in pairs:
        text = _string_value(parser, "kind", pairs["kind"])
        if text is None:
            return None
        try:
            kind = EntityKind(text)
        except ValueError:
            parser.error(pairs["kind"][1], f"unknown kind {text!r}", ErrorKind.RANGE)
            return None

    values: dict[str, Any] = {}
    for field in ("intentionality", "vulnerability", "entitativity"):
        if field in pairs:
            value = _unit_range(parser, field, pairs[field])
            if value is None:
                return None
            values[field] = value

    members: tuple[str, ...] = ()
    if "members" in pairs:
        raw, tok = pairs["members"]
        if not isinstance(raw, list):
            parser.error(tok, "members must be a [list of entity ids]")
            return None
        collected = []
        for item, item_tok in raw:
            if not isinstance(item, str):
                parser.error(item_tok, "members entries must be entity ids")
                continue
            member_refs.append((item, item_tok, id_tok.text))
            collected.append(item)
        members = tuple(collected)

    group_size: Optional[int] = None
    if "group_size" in pairs:
        raw, tok = pairs["group_size"]
        if not isinstance(raw, float) or raw != int(raw):
            parser.error(tok, "group_size must be an integer")
            return None
        group_size = int(raw)
        if group_size < 1:
            parser.error(tok, f"group_size {group_size} < 1", ErrorKind.RANGE)
            return None

    latent = False
    if "latent" in pairs:
        flag = _bool_value(parser, "latent", pairs["latent"])
        if flag is None:
            return None
        latent = flag

    synthetic = False
    if "synthetic" in pairs:
        flag = _bool_value(parser, "synthetic", pairs["synthetic"])
        if flag is None:
            return None
        synthetic = flag

    lock = LockMode.NONE
    if "lock" in pairs:
        text = _string_value(parser, "lock", pairs["lock"])
        if text is None:
            return None
        try:
            lock = LockMode(text)
        except ValueError:
            parser.error(pairs["lock"][1], f"unknown lock mode {text!r}", ErrorKind.RANGE)
            return None

    community: Optional[str] = None
    if "community" in pairs:
        community = _string_value(parser, "community", pairs["community"])
        if community is None:
            return None

    if kind in (EntityKind.GROUP, EntityKind.INSTITUTION):
        if kind is EntityKind.GROUP and not members:
            parser.error(id_tok, "group must list members", ErrorKind.RANGE)
            return None
        size = group_size if group_size is not None else max(1, len(members))
    else:
        if members:
            parser.error(id_tok, f"{kind.value} entity cannot list members", ErrorKind.RANGE)
            return None
        if group_size not in (None, 1):
            parser.error(id_tok, f"{kind.value} entity must have group_size 1", ErrorKind.RANGE)
            return None
        size = 1

    if kind in SYNTHETIC_KINDS and not latent and not synthetic:
        parser.error(id_tok, f"kind {kind.value!r} requires latent: true or synthetic: true",
                     ErrorKind.RANGE)
        return None
    if synthetic:
        declared_synthetic.append(id_tok.text)

    return EntityNode(
        id=id_tok.text,
        kind=kind,
        intentionality=values.get("intentionality", 0.5),
        vulnerability=values.get("vulnerability", 0.5),
        group_size=size,
        entitativity=values.get("entitativity", 0.0),
        members=members,
        latent=latent,
        lock=lock,
        community=community,
    )


def _build_edge(parser: _Parser, keyword_tok: Token, ordinal: int, agent: Optional[str],
                patient: Optional[str],
                pairs: dict[str, tuple[Any, Token]]) -> Optional[_PendingEdge]:
    line, column = keyword_tok.line, keyword_tok.column

    edge_id = f"e{ordinal}"
    if "id" in pairs:
        text = _string_value(parser, "id", pairs["id"])
        if text is None:
            return None
        if not _IDENT_RE.fullmatch(text) or text in _RESERVED_WORDS:
            parser.error(pairs["id"][1], f"edge id {text!r} must be identifier-shaped")
            return None
        edge_id = text

    values: dict[str, float] = {}
    for field, key in (("causality", "causality"), ("suffering", "suffering"),
                       ("exogenous", "exogenous")):
        if key in pairs:
            value = _unit_range(parser, field, pairs[key])
            if value is None:
                return None
            values[field] = value

    valence = -1.0
    if "valence" in pairs:
        raw, tok = pairs["valence"]
        if not isinstance(raw, float):
            parser.error(tok, "valence must be a number")
            return None
        if not -1.0 <= raw <= 1.0:
            parser.error(tok, f"valence {tok.text} outside [-1, 1]", ErrorKind.RANGE)
            return None
        valence = raw

    category = ""
    if "category" in pairs:
        text = _string_value(parser, "category", pairs["category"])
        if text is None:
            return None
        category = text

    edge = HarmEdge(
        id=edge_id,
        agent_id=agent,
        patient_id=patient,
        causality=values.get("causality", 1.0),
        valence=valence,
        suffering=values.get("suffering", 0.0),
        exogenous_sufficiency=values.get("exogenous", 0.0),
        act_category=category,
    )
    return _PendingEdge(edge=edge, line=line, column=column,
                        suffering_given="suffering" in pairs)


def _build_obligation(parser: _Parser, id_tok: Token, pairs: dict[str, tuple[Any, Token]],
                      refs: list[tuple[str, Token, str]]) -> Optional[ObligationEdge]:
    required = ("agent", "patient", "direction", "tag")
    for key in required:
        if key not in pairs:
            parser.error(id_tok, f"obligation {id_tok.text!r} missing required key {key!r}")
            return None

    agent = _string_value(parser, "agent", pairs["agent"])
    patient = _string_value(parser, "patient", pairs["patient"])
    tag = _string_value(parser, "tag", pairs["tag"])
    direction_text = _string_value(parser, "direction", pairs["direction"])
    if None in (agent, patient, tag, direction_text):
        return None
    try:
        direction = Direction(direction_text)
    except ValueError:
        parser.error(pairs["direction"][1], f"unknown direction {direction_text!r}", ErrorKind.RANGE)
        return None

    agency = AgencyRequirement.NONE
    if "agency" in pairs:
        text = _string_value(parser, "agency", pairs["agency"])
        if text is None:
            return None
        try:
            agency = AgencyRequirement(text)
        except ValueError:
            parser.error(pairs["agency"][1], f"unknown agency requirement {text!r}", ErrorKind.RANGE)
            return None

    demanded_by: Optional[str] = None
    if "demanded_by" in pairs:
        demanded_by = _string_value(parser, "demanded_by", pairs["demanded_by"])
        if demanded_by is None:
            return None
        refs.append((demanded_by, pairs["demanded_by"][1], "demanded_by"))

    policy_id = id_tok.text
    if "policy" in pairs:
        text = _string_value(parser, "policy", pairs["policy"])
        if text is None:
            return None
        policy_id = text

    refs.append((agent, pairs["agent"][1], "agent"))
    refs.append((patient, pairs["patient"][1], "patient"))
    return ObligationEdge(
        id=id_tok.text,
        policy_id=policy_id,
        agent_id=agent,
        patient_id=patient,
        direction=direction,
        action_tag=tag,
        demanded_by=demanded_by,
        agency_requirement=agency,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def format_number(x: float) -> str:
    """Shortest decimal that parses back to exactly the same float."""
    if isinstance(x, int):
        return str(x)
    return format(Decimal(repr(float(x))), "f")


def _quote(text: str) -> str:
    return f'"{text}"'


def serialize_graph(graph: DyadicGraph, name: str = "unnamed") -> str:
    """Canonical text for a graph; parse_scenario on the result is snapshot-equal.

    Entities emit in sorted id order with every field explicit; edges keep
    declaration order. Entities invented by passes carry `synthetic: true` so
    the re-parsed graph revalidates cleanly.
    """
    invented = graph.completion_created()
    lines = [f"scenario {_quote(name)}"]
    if not graph.allow_system_agents:
        lines.append("option no_system_agents")
    for node in sorted(graph.entities, key=lambda e: e.id):
        fields = []
        if node.kind is not EntityKind.GROUP:
            fields.append(f"kind: {node.kind.value}")
        fields.append(f"intentionality: {format_number(node.intentionality)}")
        fields.append(f"vulnerability: {format_number(node.vulnerability)}")
        if node.members:
            fields.append("members: [" + ", ".join(sorted(node.members)) + "]")
        if node.kind is not EntityKind.INDIVIDUAL:
            fields.append(f"group_size: {node.group_size}")
        fields.append(f"entitativity: {format_number(node.entitativity)}")
        if node.latent:
            fields.append("latent: true")
        if node.id in invented:
            fields.append("synthetic: true")
        if node.lock is not LockMode.NONE:
            fields.append(f"lock: {node.lock.value}")
        if node.community is not None:
            fields.append(f"community: {_quote(node.community)}")
        keyword = "group" if node.kind is EntityKind.GROUP else "entity"
        lines.append(f"{keyword} {node.id} {{ " + ", ".join(fields) + " }")
    for edge in graph.edges:
        agent = edge.agent_id if edge.agent_id is not None else "?"
        patient = edge.patient_id if edge.patient_id is not None else "?"
        fields = [
            f"id: {_quote(edge.id)}",
            f"causality: {format_number(edge.causality)}",
            f"valence: {format_number(edge.valence)}",
            f"suffering: {format_number(edge.suffering)}",
            f"exogenous: {format_number(edge.exogenous_sufficiency)}",
            f"category: {_quote(edge.act_category)}",
        ]
        lines.append(f"action {agent} -> {patient} {{ " + ", ".join(fields) + " }")
    if graph.chain_order is not None:
        lines.append("chain [" + ", ".join(graph.chain_order) + "]")
    return "\n".join(lines) + "\n"


def serialize_scenario(scenario: Scenario) -> str:
    text = serialize_graph(scenario.graph, name=scenario.name or "unnamed")
    lines = [text.rstrip("\n")]
    for ob in scenario.obligations:
        fields = [
            f"agent: {ob.agent_id}",
            f"patient: {ob.patient_id}",
            f"direction: {ob.direction.value}",
            f"tag: {_quote(ob.action_tag)}",
        ]
        if ob.demanded_by is not None:
            fields.append(f"demanded_by: {ob.demanded_by}")
        if ob.agency_requirement is not AgencyRequirement.NONE:
            fields.append(f"agency: {ob.agency_requirement.value}")
        if ob.policy_id != ob.id:
            fields.append(f"policy: {_quote(ob.policy_id)}")
        lines.append(f"obligation {ob.id} {{ " + ", ".join(fields) + " }")
    return "\n".join(lines) + "\n"

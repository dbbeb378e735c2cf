"""JSON instance and trace documents.

Payoffs travel as integer or ``"p/q"`` strings so values stay exact.
Serialisation is canonical: sorted keys, undirected edges once as
``[i, j]`` with ``i < j``, payoffs in lowest terms.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any

from scg.dynamics import DynamicsResult, ImprovementStep, ImprovementTrace, check_trace
from scg.model import GameInstance, InterferenceGraph

SCHEMA_VERSION = 1
INSTANCE_FIELDS = {"schema_version", "players", "resources", "directed", "edges", "payoffs", "monotone", "preferences"}
REQUIRED_FIELDS = INSTANCE_FIELDS - {"preferences", "monotone", "directed"}


class ParseError(ValueError):
    """Malformed document; the message names the offending field."""


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def parse_rational(raw: Any, where: str) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise ParseError(f"{where}: expected an integer or 'p/q' string, got {raw!r}")
    try:
        return Fraction(raw.strip() if isinstance(raw, str) else raw)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: {raw!r} is not an exact rational") from None


def instance_to_document(instance: GameInstance) -> dict:
    graph = instance.graph
    if graph.directed:
        edges = sorted(graph.edges)
    else:
        edges = graph.undirected_pairs()
    doc = {
        "schema_version": SCHEMA_VERSION,
        "players": graph.player_count,
        "resources": instance.resource_count,
        "directed": graph.directed,
        "edges": [list(e) for e in edges],
        "payoffs": [[[format_rational(v) for v in seq] for seq in row] for row in instance.payoffs],
        "monotone": instance.monotone,
    }
    default = tuple(tuple(range(1, instance.resource_count + 1)) for _ in range(graph.player_count))
    if instance.preferences != default:
        doc["preferences"] = [list(p) for p in instance.preferences]
    return doc


def serialize_instance(instance: GameInstance) -> str:
    return json.dumps(instance_to_document(instance), sort_keys=True, indent=1) + "\n"


def instance_digest(instance: GameInstance) -> str:
    return hashlib.sha256(serialize_instance(instance).encode()).hexdigest()


def _expect(doc: dict, key: str, kind, where: str = ""):
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"{where}{key}: expected an integer, got {value!r}")
    if kind is not int and not isinstance(value, kind):
        raise ParseError(f"{where}{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def document_to_instance(doc: Any) -> GameInstance:
    if not isinstance(doc, dict):
        raise ParseError("document: expected a JSON object")
    unknown = set(doc) - INSTANCE_FIELDS
    if unknown:
        raise ParseError(f"unknown field(s): {', '.join(sorted(unknown))}")
    missing = REQUIRED_FIELDS - set(doc)
    if missing:
        raise ParseError(f"missing field(s): {', '.join(sorted(missing))}")
    if _expect(doc, "schema_version", int) != SCHEMA_VERSION:
        raise ParseError(f"schema_version: unsupported version {doc['schema_version']}")
    n = _expect(doc, "players", int)
    big_r = _expect(doc, "resources", int)
    if n < 1 or big_r < 1:
        raise ParseError("players and resources must be positive")
    directed = _expect(doc, "directed", bool) if "directed" in doc else False
    monotone = _expect(doc, "monotone", bool) if "monotone" in doc else True

    pairs = []
    for k, edge in enumerate(_expect(doc, "edges", list)):
        if not (isinstance(edge, list) and len(edge) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in edge)):
            raise ParseError(f"edges[{k}]: expected a pair of player indices, got {edge!r}")
        i, j = edge
        if i == j:
            raise ParseError(f"edges[{k}]: self-loop on player {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"edges[{k}]: player index out of range 0..{n - 1}")
        pairs.append((i, j))
    graph = InterferenceGraph.directed_from(n, pairs) if directed else InterferenceGraph.undirected(n, pairs)

    raw_payoffs = _expect(doc, "payoffs", list)
    if len(raw_payoffs) != n:
        raise ParseError(f"payoffs: expected {n} players, got {len(raw_payoffs)}")
    tables = []
    for i, row in enumerate(raw_payoffs):
        if not isinstance(row, list) or len(row) != big_r:
            raise ParseError(f"payoffs[{i}]: expected {big_r} resource tables")
        per = []
        for r, seq in enumerate(row):
            where = f"payoffs[{i}][{r}]"
            if not isinstance(seq, list) or not seq:
                raise ParseError(f"{where}: expected a non-empty list")
            values = tuple(parse_rational(v, f"{where}[{k}]") for k, v in enumerate(seq))
            if len(values) < graph.degree(i) + 1:
                raise ParseError(f"{where}: needs at least {graph.degree(i) + 1} entries (degree + 1)")
            if monotone:
                for k, (a, b) in enumerate(zip(values, values[1:])):
                    if a < b:
                        raise ParseError(f"{where}[{k + 1}]: {b} exceeds {a} but monotone is true")
            per.append(values)
        tables.append(tuple(per))

    prefs = None
    if "preferences" in doc:
        raw_prefs = _expect(doc, "preferences", list)
        if len(raw_prefs) != n:
            raise ParseError(f"preferences: expected {n} orders, got {len(raw_prefs)}")
        for i, order in enumerate(raw_prefs):
            if not isinstance(order, list) or sorted(order) != list(range(1, big_r + 1)):
                raise ParseError(f"preferences[{i}]: must be a permutation of 1..{big_r}")
        prefs = tuple(tuple(p) for p in raw_prefs)
    try:
        return GameInstance(graph, big_r, tuple(tables), monotone=monotone, preferences=prefs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_instance(text: str) -> GameInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return document_to_instance(doc)


# -- traces ------------------------------------------------------------------


def trace_to_document(
    instance: GameInstance,
    result: DynamicsResult,
    scheduler: str,
    mode: str,
    seed: int | None,
) -> dict:
    trace = result.trace
    return {
        "header": {
            "instance_digest": instance_digest(instance),
            "scheduler": scheduler,
            "mode": mode,
            "seed": seed,
            "start": list(trace.initial_state),
        },
        "rows": [
            {
                "t": s.time,
                "mover": s.mover,
                "from": s.from_resource,
                "to": s.to_resource,
                "payoff_before": format_rational(s.payoff_before),
                "payoff_after": format_rational(s.payoff_after),
            }
            for s in trace.steps
        ],
        "footer": {
            "status": result.status,
            "final": list(trace.final_state),
            "cycle_start": result.cycle_start,
        },
    }


def serialize_trace(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def document_to_trace(doc: dict) -> ImprovementTrace:
    try:
        steps = tuple(
            ImprovementStep(
                time=int(row["t"]),
                mover=int(row["mover"]),
                from_resource=int(row["from"]),
                to_resource=int(row["to"]),
                payoff_before=parse_rational(row["payoff_before"], f"rows[{k}].payoff_before"),
                payoff_after=parse_rational(row["payoff_after"], f"rows[{k}].payoff_after"),
            )
            for k, row in enumerate(doc["rows"])
        )
        start = tuple(int(x) for x in doc["header"]["start"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"trace document: missing or malformed {exc}") from None
    return ImprovementTrace(start, steps)


def replay_trace_document(instance: GameInstance, doc: dict) -> tuple[int, ...]:
    """Check a trace document against ``instance``; returns the final profile."""
    if doc.get("header", {}).get("instance_digest") != instance_digest(instance):
        raise ParseError("trace was recorded against a different instance")
    trace = document_to_trace(doc)
    final = check_trace(instance, trace, strict=True)
    if list(final) != doc["footer"]["final"]:
        raise ParseError("trace footer disagrees with the replayed final profile")
    return final


def parse_profile(text: str, instance: GameInstance | None = None) -> tuple[int, ...]:
    """Comma-separated, 1-indexed resource list, e.g. ``"1,2,1"``."""
    try:
        profile = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise ParseError(f"profile {text!r}: expected comma-separated integers") from None
    if instance is not None:
        try:
            profile = instance.check_profile(profile)
        except ValueError as exc:
            raise ParseError(f"profile {text!r}: {exc}") from None
    return profile


def format_profile(profile) -> str:
    return ",".join(str(r) for r in profile)

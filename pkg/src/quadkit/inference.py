"""Parsing generated target sequences back into label-space quads and
aggregating multi-order views by threshold voting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .augmentation import OrderTemplate, SSEP_JOIN
from .core import MappedQuad, MappingError, Quad, unmap_quad


@dataclass(frozen=True)
class ParseDiagnostic:
    segment: str
    reason: str


@dataclass
class ParseResult:
    quads: list[Quad]
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)


def _parse_segment(segment: str, order: OrderTemplate) -> Quad:
    markers = order.order
    rest = segment
    values = []
    for i, marker in enumerate(markers):
        tag = marker.surface + " "
        if not rest.startswith(tag):
            raise ValueError(f"expected {marker.surface} at {rest[:20]!r}")
        rest = rest[len(tag):]
        if i < len(markers) - 1:
            sep = " " + markers[i + 1].surface + " "
            pos = rest.find(sep)
            if pos == -1:
                raise ValueError(f"missing {markers[i + 1].surface}")
            values.append(rest[:pos])
            rest = rest[pos + 1:]
        else:
            values.append(rest)
    values = [v.strip() for v in values]
    if any(not v for v in values):
        raise ValueError("empty element value")
    by_kind = {m.name: v for m, v in zip(markers, values)}
    mapped = MappedQuad(
        m_a=by_kind["A"], m_c=by_kind["C"], m_o=by_kind["O"], m_s=by_kind["S"]
    )
    return unmap_quad(mapped)


def parse_target(target: str, order: OrderTemplate) -> ParseResult:
    """Split a generated sequence into quad segments and unmap each back to
    label space. Structurally broken segments are dropped and reported."""
    result = ParseResult(quads=[])
    if not target.strip():
        result.diagnostics.append(ParseDiagnostic(target, "empty target"))
        return result
    for segment in target.split(SSEP_JOIN):
        try:
            result.quads.append(_parse_segment(segment, order))
        except (ValueError, MappingError) as exc:
            result.diagnostics.append(ParseDiagnostic(segment, str(exc)))
    return result


@dataclass(frozen=True)
class OrderView:
    """One order's prediction for a sentence, as a set of quads."""

    order_surface: str
    quads: frozenset

    @classmethod
    def from_sequence(cls, sequence: str, order: OrderTemplate) -> "OrderView":
        return cls(
            order_surface=order.surface,
            quads=frozenset(parse_target(sequence, order).quads),
        )


@dataclass
class VoteTally:
    votes: dict
    k: int
    tau: float

    def surviving(self) -> set:
        return {q for q, n in self.votes.items() if n >= self.tau}


def tally_votes(views: Iterable[OrderView], tau: float) -> VoteTally:
    views = list(views)
    if not views:
        raise ValueError("cannot aggregate an empty view list")
    if tau <= 0:
        raise ValueError(f"voting threshold must be positive, got {tau}")
    votes: dict = {}
    for view in views:
        for quad in view.quads:
            votes[quad] = votes.get(quad, 0) + 1
    return VoteTally(votes=votes, k=len(views), tau=tau)


def aggregate_votes(views: Iterable[OrderView], tau: float) -> set:
    """Quads predicted by at least ``tau`` of the k order views."""
    return tally_votes(views, tau).surviving()


def write_predictions_jsonl(
    rows: Iterable[tuple[str, str, str]], out: TextIO
) -> None:
    """Rows of (source id, order surface, generated sequence)."""
    for source_id, order_surface, sequence in rows:
        out.write(
            json.dumps(
                {"source_id": source_id, "order": order_surface, "sequence": sequence},
                ensure_ascii=False,
            )
            + "\n"
        )


def read_predictions_jsonl(source: TextIO | Iterable[str]) -> list[tuple[str, str, str]]:
    rows = []
    for line in source:
        if not line.strip():
            continue
        obj = json.loads(line)
        rows.append((str(obj["source_id"]), obj["order"], obj["sequence"]))
    return rows


def write_final_jsonl(per_sentence: Iterable[tuple[str, Iterable[Quad]]], out: TextIO) -> None:
    """Voted predictions in the canonical quad schema, one sentence per line."""
    from .dataset_io import quad_to_json

    for source_id, quads in per_sentence:
        row = {
            "source_id": source_id,
            "quads": [quad_to_json(q) for q in sorted(quads, key=lambda q: q.as_tuple())],
        }
        out.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_final_jsonl(source: TextIO | Iterable[str]) -> dict:
    from .dataset_io import quad_from_json

    per_sentence = {}
    for line in source:
        if not line.strip():
            continue
        obj = json.loads(line)
        per_sentence[str(obj["source_id"])] = [quad_from_json(q) for q in obj["quads"]]
    return per_sentence

"""Order scoring over the training set via pluggable sequence scorers and
top-k selection of candidate prediction orders."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable, Protocol, TextIO

from .augmentation import OrderTemplate, render_quad_instance
from .core import Quad, Sentence


class ScoreError(ValueError):
    """Raised for unusable score inputs (empty sets, non-finite scores)."""


class SequenceScoreProvider(Protocol):
    """Scores how well a target sequence fits an input prompt.

    The scale (probability, total or length-normalized log-likelihood) is the
    provider's declared property; it only needs to be deterministic for a
    fixed (input, target) within one run.
    """

    def score(self, input: str, target: str) -> float: ...


@dataclass(frozen=True)
class OrderScore:
    order: OrderTemplate
    score: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ScoreError(f"non-finite score for order {self.order.surface}")


class ToyScoreProvider:
    """Deterministic hash-based pseudo-scorer in [0, 1) for tests and
    offline demos; no model involved."""

    def __init__(self, salt: str = ""):
        self.salt = salt

    def score(self, input: str, target: str) -> float:
        digest = hashlib.sha256(
            f"{self.salt}\x1f{input}\x1f{target}".encode("utf-8")
        ).digest()
        return int.from_bytes(digest[:8], "big") / 2**64


def score_order(
    template: OrderTemplate,
    sentences: Iterable[tuple[Sentence, list[Quad]]],
    provider: SequenceScoreProvider,
) -> OrderScore:
    """Mean provider score of the rendered (input, target) pair across all
    usable (quad-bearing) sentences."""
    per_sentence = []
    for sentence, quads in sentences:
        if not quads:
            continue
        inst = render_quad_instance(sentence, quads, template)
        value = provider.score(inst.input, inst.target)
        if not math.isfinite(value):
            raise ScoreError(
                f"provider returned non-finite score for sentence {sentence.id!r}"
            )
        per_sentence.append(value)
    if not per_sentence:
        raise ScoreError("no usable sentences to score (all have zero quads)")
    return OrderScore(order=template, score=math.fsum(per_sentence) / len(per_sentence))


def select_top_k(scores: list[OrderScore], k: int) -> list[OrderTemplate]:
    """The k highest-scoring orders; ties break toward the lexicographically
    smallest surface. Output sorted by descending score, then surface."""
    if not 1 <= k <= len(scores):
        raise ScoreError(f"k must be in [1, {len(scores)}], got {k}")
    surfaces = [s.order.surface for s in scores]
    if len(set(surfaces)) != len(surfaces):
        raise ScoreError("orders must be distinct")
    ranked = sorted(scores, key=lambda s: (-s.score, s.order.surface))
    return [s.order for s in ranked[:k]]


def write_scores_jsonl(
    rows: Iterable[tuple[str, str, float]], out: TextIO
) -> None:
    """Rows of (order surface, source id, score), one JSON object per line."""
    for order_surface, source_id, value in rows:
        out.write(
            json.dumps(
                {"order": order_surface, "source_id": source_id, "score": value},
                ensure_ascii=False,
            )
            + "\n"
        )


def read_scores_jsonl(source: TextIO | Iterable[str]) -> list[tuple[str, str, float]]:
    rows = []
    for line in source:
        if not line.strip():
            continue
        obj = json.loads(line)
        rows.append((obj["order"], obj["source_id"], float(obj["score"])))
    return rows


def aggregate_scores(rows: Iterable[tuple[str, str, float]]) -> list[OrderScore]:
    """Collapse per-sentence score rows into one mean score per order."""
    by_order: dict[str, list[float]] = {}
    for order_surface, source_id, value in rows:
        if not math.isfinite(value):
            raise ScoreError(
                f"non-finite score for order {order_surface}, sentence {source_id!r}"
            )
        by_order.setdefault(order_surface, []).append(value)
    return [
        OrderScore(
            order=OrderTemplate.from_surface(surface),
            score=math.fsum(values) / len(values),
        )
        for surface, values in by_order.items()
    ]


def ranking_report(scores: list[OrderScore], k: int) -> list[dict]:
    """JSON-ready top-k ranking: ``{"order", "mean_score", "rank"}``."""
    ranked = sorted(scores, key=lambda s: (-s.score, s.order.surface))[:k]
    return [
        {"order": s.order.surface, "mean_score": s.score, "rank": i + 1}
        for i, s in enumerate(ranked)
    ]

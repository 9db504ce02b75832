"""Stepwise task augmentation: quad-prediction instances for element
orders, pairwise relation instances for base and composite pair markers,
the overall relation instance, and seeded pairwise permutation sampling."""

from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass
from typing import Iterable, TextIO

from .core import MARKERS, ElementMarker, MappedQuad, Quad, Sentence, map_quad

QUAD_PREFIX = "Quad Prediction: "
PAIRWISE_PREFIX = "Pairwise Relation: "
OVERALL_PREFIX = "Overall Relation: "

OVERALL_MARKER = "[CSAO]"
SSEP_JOIN = " [SSEP] "

TASK_QUAD = "quad"
TASK_PAIRWISE = "pairwise"
TASK_OVERALL = "overall"


class RenderError(ValueError):
    """Raised when a sentence cannot be rendered into a task instance."""


@dataclass(frozen=True)
class OrderTemplate:
    """A permutation of the four element markers defining a prediction order."""

    order: tuple[ElementMarker, ElementMarker, ElementMarker, ElementMarker]

    def __post_init__(self) -> None:
        if sorted(m.name for m in self.order) != ["A", "C", "O", "S"]:
            raise ValueError(f"order must contain each of A, C, O, S once: {self.order}")

    @property
    def surface(self) -> str:
        return "".join(m.surface for m in self.order)

    @classmethod
    def from_surface(cls, surface: str) -> "OrderTemplate":
        by_surface = {m.surface: m for m in ElementMarker}
        markers = []
        rest = surface
        while rest:
            for tag, marker in by_surface.items():
                if rest.startswith(tag):
                    markers.append(marker)
                    rest = rest[len(tag):]
                    break
            else:
                raise ValueError(f"bad order surface {surface!r}")
        return cls(order=tuple(markers))


def enumerate_quad_orders() -> list[OrderTemplate]:
    """All 24 marker permutations, in lexicographic order of marker kind."""
    return [OrderTemplate(order=perm) for perm in itertools.permutations(MARKERS)]


class PairMarker(enum.Enum):
    """A causal pair of element markers rendered as ``left is right``."""

    AO = (ElementMarker.A, ElementMarker.O)
    CS = (ElementMarker.C, ElementMarker.S)
    AS = (ElementMarker.A, ElementMarker.S)
    CO = (ElementMarker.C, ElementMarker.O)

    @property
    def surface(self) -> str:
        return f"[{self.name}]"

    @property
    def left(self) -> ElementMarker:
        return self.value[0]

    @property
    def right(self) -> ElementMarker:
        return self.value[1]


BASE_PAIRS = (PairMarker.AO, PairMarker.CS, PairMarker.AS, PairMarker.CO)


@dataclass(frozen=True)
class PairwiseCandidate:
    """One base pair marker, or an ordered composite of two distinct ones."""

    pairs: tuple[PairMarker, ...]

    def __post_init__(self) -> None:
        if len(self.pairs) not in (1, 2):
            raise ValueError(f"candidate must hold 1 or 2 pair markers: {self.pairs}")
        if len(self.pairs) == 2 and self.pairs[0] is self.pairs[1]:
            raise ValueError(f"composite pair markers must be distinct: {self.pairs}")

    @property
    def surface(self) -> str:
        return "".join(p.surface for p in self.pairs)

    @property
    def is_composite(self) -> bool:
        return len(self.pairs) == 2


def enumerate_pairwise_candidates() -> list[PairwiseCandidate]:
    """The 4 base pair markers followed by the 12 ordered composites of
    distinct base markers."""
    base = [PairwiseCandidate(pairs=(p,)) for p in BASE_PAIRS]
    composites = [
        PairwiseCandidate(pairs=(first, second))
        for first in BASE_PAIRS
        for second in BASE_PAIRS
        if first is not second
    ]
    return base + composites


def pps_sample(k: int, seed: int) -> list[PairwiseCandidate]:
    """Pairwise permutation sampling: the 4 base candidates plus ``k - 4``
    composites drawn uniformly without replacement.

    Deterministic for a fixed seed; the sampled composites keep their
    enumeration order.
    """
    candidates = enumerate_pairwise_candidates()
    base = [c for c in candidates if not c.is_composite]
    composites = [c for c in candidates if c.is_composite]
    if not 4 <= k <= len(candidates):
        raise ValueError(f"k must be in [4, {len(candidates)}], got {k}")
    rng = random.Random(seed)
    picked_idx = sorted(rng.sample(range(len(composites)), k - 4))
    return base + [composites[i] for i in picked_idx]


@dataclass(frozen=True)
class TaskInstance:
    """One augmented training example: prompt and target strings."""

    task: str
    source_id: str
    order_surface: str
    input: str
    target: str

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "source_id": self.source_id,
            "order": self.order_surface,
            "input": self.input,
            "target": self.target,
        }

    @classmethod
    def from_json(cls, row: dict) -> "TaskInstance":
        return cls(
            task=row["task"],
            source_id=row["source_id"],
            order_surface=row["order"],
            input=row["input"],
            target=row["target"],
        )


def _mapped(quads: list[Quad], where: str) -> list[MappedQuad]:
    if not quads:
        raise RenderError(f"cannot render {where} instance for a sentence with no quads")
    return [map_quad(q) for q in quads]


def render_quad_target(quads: list[Quad], template: OrderTemplate) -> str:
    segments = []
    for mq in _mapped(quads, TASK_QUAD):
        segments.append(
            " ".join(f"{m.surface} {mq.element(m)}" for m in template.order)
        )
    return SSEP_JOIN.join(segments)


def render_quad_instance(
    sentence: Sentence, quads: list[Quad], template: OrderTemplate
) -> TaskInstance:
    return TaskInstance(
        task=TASK_QUAD,
        source_id=sentence.id,
        order_surface=template.surface,
        input=f"{QUAD_PREFIX}{sentence.text} {template.surface}",
        target=render_quad_target(quads, template),
    )


def render_pairwise_instance(
    sentence: Sentence, quads: list[Quad], candidate: PairwiseCandidate
) -> TaskInstance:
    segments = []
    for mq in _mapped(quads, TASK_PAIRWISE):
        segments.append(
            " ".join(
                f"{p.surface} {mq.element(p.left)} is {mq.element(p.right)}"
                for p in candidate.pairs
            )
        )
    return TaskInstance(
        task=TASK_PAIRWISE,
        source_id=sentence.id,
        order_surface=candidate.surface,
        input=f"{PAIRWISE_PREFIX}{sentence.text} {candidate.surface}",
        target=SSEP_JOIN.join(segments),
    )


def render_overall_instance(sentence: Sentence, quads: list[Quad]) -> TaskInstance:
    segments = [
        f"{OVERALL_MARKER} The {mq.m_c} is {mq.m_s} because {mq.m_a} is {mq.m_o}"
        for mq in _mapped(quads, TASK_OVERALL)
    ]
    return TaskInstance(
        task=TASK_OVERALL,
        source_id=sentence.id,
        order_surface="",
        input=f"{OVERALL_PREFIX}{sentence.text}",
        target=SSEP_JOIN.join(segments),
    )


def build_training_corpus(
    sentences: Iterable[tuple[Sentence, list[Quad]]],
    quad_orders: list[OrderTemplate],
    pairwise: list[PairwiseCandidate],
    include_overall: bool = True,
) -> list[TaskInstance]:
    """Render the full multi-task corpus; sentences with zero quads are
    excluded. Output order is (sentence, task, candidate index)."""
    instances = []
    for sentence, quads in sentences:
        if not quads:
            continue
        for template in quad_orders:
            instances.append(render_quad_instance(sentence, quads, template))
        for candidate in pairwise:
            instances.append(render_pairwise_instance(sentence, quads, candidate))
        if include_overall:
            instances.append(render_overall_instance(sentence, quads))
    return instances


def write_corpus_jsonl(instances: Iterable[TaskInstance], out: TextIO) -> None:
    for inst in instances:
        out.write(json.dumps(inst.to_json(), ensure_ascii=False) + "\n")


def read_corpus_jsonl(source: TextIO | Iterable[str]) -> list[TaskInstance]:
    return [TaskInstance.from_json(json.loads(line)) for line in source if line.strip()]

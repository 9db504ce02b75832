"""Canonical domain types for sentences and sentiment quads, plus the
bidirectional mapping between label space and target-sequence space."""

from __future__ import annotations

import enum
from dataclasses import dataclass

NULL = "NULL"

POLARITIES = ("positive", "negative", "neutral")

POLARITY_TO_WORD = {
    "positive": "great",
    "negative": "bad",
    "neutral": "ok",
}
WORD_TO_POLARITY = {w: p for p, w in POLARITY_TO_WORD.items()}

SENTIMENT_WORDS = frozenset(POLARITY_TO_WORD.values())

NULL_WORD = "it"

SSEP = "[SSEP]"


class MappingError(ValueError):
    """Raised when a quad cannot be mapped to or from target-sequence space."""


class ElementMarker(enum.Enum):
    """Bracketed tag steering the position of one sentiment element."""

    A = "[A]"
    C = "[C]"
    O = "[O]"
    S = "[S]"

    @property
    def surface(self) -> str:
        return self.value


MARKERS = (ElementMarker.A, ElementMarker.C, ElementMarker.O, ElementMarker.S)


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"sentence {self.id!r} has empty text")

    def tokens(self) -> tuple[str, ...]:
        return tuple(self.text.split())


@dataclass(frozen=True)
class Quad:
    """One sentiment quadruple in label space.

    Aspect and opinion are surface spans or the literal sentinel ``NULL``
    (case-sensitive). Elements are stored trimmed so that quad equality is
    exact string equality on all four slots.
    """

    aspect: str
    category: str
    opinion: str
    polarity: str

    def __post_init__(self) -> None:
        for slot in ("aspect", "category", "opinion", "polarity"):
            object.__setattr__(self, slot, getattr(self, slot).strip())
        if self.polarity not in POLARITIES:
            raise MappingError(
                f"unknown polarity {self.polarity!r}; expected one of {POLARITIES}"
            )

    def as_tuple(self) -> tuple[str, str, str, str]:
        return (self.aspect, self.category, self.opinion, self.polarity)


@dataclass(frozen=True)
class MappedQuad:
    """A quad rendered into target-sequence space: NULL spans become ``it``
    and polarities become sentiment words."""

    m_a: str
    m_c: str
    m_o: str
    m_s: str

    def __post_init__(self) -> None:
        if self.m_s not in SENTIMENT_WORDS:
            raise MappingError(
                f"mapped sentiment {self.m_s!r} not in {sorted(SENTIMENT_WORDS)}"
            )
        if self.m_a == NULL or self.m_o == NULL:
            raise MappingError("mapped aspect/opinion must not be the NULL sentinel")

    def element(self, marker: ElementMarker) -> str:
        return {
            ElementMarker.A: self.m_a,
            ElementMarker.C: self.m_c,
            ElementMarker.O: self.m_o,
            ElementMarker.S: self.m_s,
        }[marker]


def map_quad(q: Quad) -> MappedQuad:
    """Map a label-space quad into target-sequence space."""
    if q.polarity not in POLARITY_TO_WORD:
        raise MappingError(f"cannot map unknown polarity {q.polarity!r}")
    return MappedQuad(
        m_a=NULL_WORD if q.aspect == NULL else q.aspect,
        m_c=q.category,
        m_o=NULL_WORD if q.opinion == NULL else q.opinion,
        m_s=POLARITY_TO_WORD[q.polarity],
    )


def unmap_quad(mq: MappedQuad) -> Quad:
    """Exact inverse of :func:`map_quad`, resolving ``it`` back to NULL."""
    if mq.m_s not in WORD_TO_POLARITY:
        raise MappingError(f"cannot invert unknown sentiment word {mq.m_s!r}")
    return Quad(
        aspect=NULL if mq.m_a == NULL_WORD else mq.m_a,
        category=mq.m_c,
        opinion=NULL if mq.m_o == NULL_WORD else mq.m_o,
        polarity=WORD_TO_POLARITY[mq.m_s],
    )

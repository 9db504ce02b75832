"""Schema-based constrained decoding: a word-level automaton over the
target grammar that yields allowed-continuation sets, validates complete
sequences, and drives greedy/beam generation over a pluggable next-token
distribution."""

from __future__ import annotations

import hashlib
import random
import string
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Protocol, Sequence

from .augmentation import OrderTemplate
from .core import NULL_WORD, SENTIMENT_WORDS, SSEP, ElementMarker, Sentence


class AutomatonError(ValueError):
    """A decoder state or token stream inconsistent with the schema."""


class DeadEndError(RuntimeError):
    """No legal continuation exists; unreachable if the automaton is sound."""


class _EndOfSequence:
    """Sentinel member of allowed-token sets marking a legal stop."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "<end>"


END = _EndOfSequence()

_SPAN_KINDS = (ElementMarker.A, ElementMarker.O)

BOUNDARY = "boundary"


@dataclass(frozen=True)
class DecodingSchema:
    """Per-field candidate vocabularies plus the marker order they follow."""

    categories: tuple[str, ...]
    order: OrderTemplate
    sentiment_words: frozenset = SENTIMENT_WORDS
    separator: str = SSEP
    strict_spans: bool = False

    def __post_init__(self) -> None:
        if not self.categories:
            raise ValueError("schema needs a non-empty category taxonomy")
        if self.sentiment_words != SENTIMENT_WORDS:
            raise ValueError(
                f"sentiment words must be exactly {sorted(SENTIMENT_WORDS)}"
            )
        structural = self._structural_tokens()
        for cat in self.categories:
            if not cat.strip():
                raise ValueError("empty category in taxonomy")
            if structural & set(cat.split()):
                raise ValueError(f"category {cat!r} collides with structural tokens")

    def _structural_tokens(self) -> set[str]:
        return {m.surface for m in ElementMarker} | {self.separator}

    @cached_property
    def _category_tuples(self) -> frozenset:
        return frozenset(tuple(cat.split()) for cat in self.categories)

    @cached_property
    def _category_trie(self) -> Mapping[tuple, frozenset]:
        children: dict[tuple, set[str]] = {}
        for toks in self._category_tuples:
            for i in range(len(toks)):
                children.setdefault(toks[:i], set()).add(toks[i])
        return {prefix: frozenset(nxt) for prefix, nxt in children.items()}


@dataclass(frozen=True)
class DecoderState:
    """Position in the target grammar after consuming a token prefix.

    ``field_pos`` is the index of the open field within the schema order, or
    -1 when the automaton expects the first marker of a (new) quad segment.
    """

    consumed: tuple[str, ...] = ()
    field_pos: int = -1
    field_tokens: tuple[str, ...] = ()
    quad_index: int = 0

    def current_field(self, schema: DecodingSchema) -> str:
        if self.field_pos < 0:
            return BOUNDARY
        return schema.order.order[self.field_pos].name


def _span_pool(sentence: Sentence, schema: DecodingSchema) -> frozenset:
    """Aspect/opinion candidates: the sentence's whitespace tokens, their
    punctuation-stripped variants (gold spans drop trailing punctuation),
    and the NULL placeholder word."""
    structural = {m.surface for m in ElementMarker} | {schema.separator}
    tokens = set(sentence.tokens())
    tokens |= {v for t in tokens if (v := t.strip(string.punctuation))}
    return frozenset((tokens | {NULL_WORD}) - structural)


def _matches_window(span: tuple[str, ...], window: tuple[str, ...]) -> bool:
    return all(
        s == w or s == w.strip(string.punctuation) for s, w in zip(span, window)
    )


def _span_continuations(
    span: tuple[str, ...], sentence: Sentence, schema: DecodingSchema
) -> frozenset:
    pool = _span_pool(sentence, schema)
    if not schema.strict_spans:
        return pool
    toks = sentence.tokens()
    if not span:
        return pool
    # strict mode: span plus the candidate must stay a contiguous subsequence
    n = len(span) + 1
    allowed = set()
    for cand in pool:
        ext = span + (cand,)
        if any(_matches_window(ext, toks[i : i + n]) for i in range(len(toks) - n + 1)):
            allowed.add(cand)
    return frozenset(allowed)


def _field_complete(state: DecoderState, schema: DecodingSchema) -> bool:
    if state.field_pos < 0:
        return False
    kind = schema.order.order[state.field_pos]
    if kind in _SPAN_KINDS:
        return len(state.field_tokens) >= 1
    if kind is ElementMarker.C:
        return state.field_tokens in schema._category_tuples
    return len(state.field_tokens) == 1


def _followers(state: DecoderState, schema: DecodingSchema) -> set:
    """What may come after the open field's content: the next marker, or the
    separator / end when the field closes the quad."""
    if state.field_pos < 3:
        return {schema.order.order[state.field_pos + 1].surface}
    return {schema.separator, END}


def is_end_legal(state: DecoderState, schema: DecodingSchema) -> bool:
    return state.field_pos == 3 and _field_complete(state, schema)


def next_allowed(
    state: DecoderState, sentence: Sentence, schema: DecodingSchema
) -> set:
    """The set of tokens that may legally extend the partial output, with
    ``END`` standing in for a legal stop."""
    order = schema.order.order
    if state.field_pos < 0:
        return {order[0].surface}
    if state.field_pos > 3:
        raise AutomatonError(f"field position {state.field_pos} out of range")
    kind = order[state.field_pos]
    complete = _field_complete(state, schema)
    allowed: set = set()
    if kind in _SPAN_KINDS:
        allowed |= _span_continuations(state.field_tokens, sentence, schema)
    elif kind is ElementMarker.C:
        allowed |= schema._category_trie.get(state.field_tokens, frozenset())
    else:  # sentiment: exactly one word
        if not state.field_tokens:
            allowed |= schema.sentiment_words
    if complete:
        allowed |= _followers(state, schema)
    if not allowed:
        raise AutomatonError(
            f"state {state} has no continuations; inconsistent with schema order "
            f"{schema.order.surface}"
        )
    return allowed


def scan(
    tokens: Iterable[str], sentence: Sentence, schema: DecodingSchema
) -> DecoderState:
    """The state reached after consuming a token prefix left to right."""
    state = DecoderState()
    for tok in tokens:
        state = step(state, tok, sentence, schema)
    return state


def step(
    state: DecoderState, token: str, sentence: Sentence, schema: DecodingSchema
) -> DecoderState:
    """Advance the automaton by one consumed token."""
    allowed = next_allowed(state, sentence, schema)
    if token not in allowed:
        raise AutomatonError(f"token {token!r} not allowed in state {state}")
    consumed = state.consumed + (token,)
    order = schema.order.order
    if state.field_pos < 0:
        return DecoderState(consumed, 0, (), state.quad_index)
    # structural tokens take priority over content (pools exclude them)
    if _field_complete(state, schema):
        if token == schema.separator:
            return DecoderState(consumed, -1, (), state.quad_index + 1)
        if state.field_pos < 3 and token == order[state.field_pos + 1].surface:
            return DecoderState(consumed, state.field_pos + 1, (), state.quad_index)
    return DecoderState(
        consumed, state.field_pos, state.field_tokens + (token,), state.quad_index
    )


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    error_index: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid


def validate_sequence(
    target: str, sentence: Sentence, schema: DecodingSchema
) -> ValidationResult:
    """Accept iff a left-to-right scan stays within the allowed sets at every
    token and ends at a legal quad boundary."""
    tokens = target.split()
    state = DecoderState()
    for i, tok in enumerate(tokens):
        try:
            if tok not in next_allowed(state, sentence, schema):
                return ValidationResult(False, i, f"token {tok!r} not allowed here")
            state = step(state, tok, sentence, schema)
        except AutomatonError as exc:
            return ValidationResult(False, i, str(exc))
    if not is_end_legal(state, schema):
        return ValidationResult(False, len(tokens), "sequence ends mid-quad")
    return ValidationResult(True)


def validate_marker_skeleton(target: str, marker_surfaces: Sequence[str]) -> ValidationResult:
    """Relaxed check for pairwise/overall targets: every segment carries the
    expected markers in order, each followed by at least one content token."""
    all_structural = {f"[{k}]" for k in ("A", "C", "O", "S", "AO", "CS", "AS", "CO", "CSAO")}
    segments = target.split(f" {SSEP} ")
    pos = 0
    for segment in segments:
        tokens = segment.split()
        expect = list(marker_surfaces)
        content_since_marker = -1  # -1: no marker seen yet in this segment
        for i, tok in enumerate(tokens):
            if expect and tok == expect[0]:
                if content_since_marker == 0:
                    return ValidationResult(False, pos + i, "marker with empty field")
                expect.pop(0)
                content_since_marker = 0
            elif tok in all_structural:
                return ValidationResult(False, pos + i, f"unexpected marker {tok!r}")
            else:
                if content_since_marker < 0:
                    return ValidationResult(False, pos + i, "content before first marker")
                content_since_marker += 1
        if expect:
            return ValidationResult(False, pos + len(tokens), f"missing marker {expect[0]!r}")
        if content_since_marker == 0:
            return ValidationResult(False, pos + len(tokens), "marker with empty field")
        pos += len(tokens) + 1  # account for the separator token
    return ValidationResult(True)


class NextTokenDistributionProvider(Protocol):
    """Stand-in for the generative model at inference: proposes scored
    candidate tokens (possibly including ``END``) for a partial output."""

    def propose(self, input: str, consumed: tuple[str, ...]) -> Mapping:
        ...


class RandomProposalProvider:
    """Proposes a random scored subset of a fixed vocabulary; deterministic
    for a fixed seed, independent of call order."""

    def __init__(self, seed: int, vocabulary: Iterable[str], n_proposals: int = 8):
        self.seed = seed
        self.vocabulary = sorted(set(vocabulary))
        self.n_proposals = n_proposals

    def propose(self, input: str, consumed: tuple[str, ...]) -> Mapping:
        key = f"{self.seed}\x1f{input}\x1f" + "\x1f".join(consumed)
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        universe = self.vocabulary + [END]
        picked = rng.sample(universe, min(self.n_proposals, len(universe)))
        return {tok: rng.random() for tok in picked}


class GoldGreedyProvider:
    """Proposes the gold target token by token; used for mock end-to-end
    pipelines where generation should reproduce the reference exactly."""

    def __init__(self, gold_by_input: Mapping[str, str]):
        self._gold = {k: tuple(v.split()) for k, v in gold_by_input.items()}

    def propose(self, input: str, consumed: tuple[str, ...]) -> Mapping:
        gold = self._gold.get(input)
        if gold is None or consumed != gold[: len(consumed)]:
            return {}
        if len(consumed) == len(gold):
            return {END: 1.0}
        return {gold[len(consumed)]: 1.0}


def _forced_continuation(
    state: DecoderState, sentence: Sentence, schema: DecodingSchema
):
    """Deterministic token that makes progress toward a legal end; used when
    the provider proposes nothing in-schema."""
    if is_end_legal(state, schema):
        return END
    allowed = next_allowed(state, sentence, schema)
    concrete = sorted(t for t in allowed if isinstance(t, str))
    if not concrete:
        raise DeadEndError(f"no legal continuation from state {state}")
    if _field_complete(state, schema):
        # close the field via its follower rather than padding more content
        followers = [t for t in concrete if t in _followers(state, schema)]
        if followers:
            return followers[0]
    return concrete[0]


@dataclass
class _Hypothesis:
    tokens: tuple[str, ...]
    state: DecoderState
    score: float
    finished: bool = False


def constrained_generate(
    input: str,
    sentence: Sentence,
    schema: DecodingSchema,
    provider: NextTokenDistributionProvider,
    beam: int = 1,
    step_cap: int = 256,
) -> str:
    """Generate a target sequence whose every token survives the schema;
    the result always passes :func:`validate_sequence`."""
    if beam < 1:
        raise ValueError(f"beam width must be >= 1, got {beam}")
    beams = [_Hypothesis(tokens=(), state=DecoderState(), score=0.0)]
    for _ in range(step_cap):
        if all(h.finished for h in beams):
            break
        candidates: list[_Hypothesis] = []
        for hyp in beams:
            if hyp.finished:
                candidates.append(hyp)
                continue
            allowed = next_allowed(hyp.state, sentence, schema)
            if is_end_legal(hyp.state, schema):
                allowed = allowed | {END}
            proposals = provider.propose(input, hyp.tokens)
            scored = [(tok, sc) for tok, sc in proposals.items() if tok in allowed]
            if not scored:
                scored = [(_forced_continuation(hyp.state, sentence, schema), 0.0)]
            for tok, sc in scored:
                if tok is END:
                    candidates.append(
                        _Hypothesis(hyp.tokens, hyp.state, hyp.score + sc, True)
                    )
                else:
                    candidates.append(
                        _Hypothesis(
                            hyp.tokens + (tok,),
                            step(hyp.state, tok, sentence, schema),
                            hyp.score + sc,
                        )
                    )
        candidates.sort(key=lambda h: (-h.score, h.tokens))
        beams = candidates[:beam]
    best = next((h for h in beams if h.finished), None)
    if best is None:
        # step cap hit mid-quad: close the grammar deterministically
        best = beams[0]
        while not best.finished:
            tok = _forced_continuation(best.state, sentence, schema)
            if tok is END:
                best.finished = True
            else:
                best.state = step(best.state, tok, sentence, schema)
                best.tokens = best.tokens + (tok,)
    return " ".join(best.tokens)

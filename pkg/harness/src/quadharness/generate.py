"""Constrained greedy generation: the word-level grammar automaton from
quadkit supplies the allowed-token sets, and this adapter turns them into
token-id masks over the model's vocabulary at every decoding step."""

from __future__ import annotations

import torch

from quadkit.core import Sentence
from quadkit.decoding import (
    END,
    DecoderState,
    DecodingSchema,
    is_end_legal,
    next_allowed,
    step,
)

from .vocab import EOS_ID, PAD_ID, WordVocab


class GenerationError(RuntimeError):
    """Generation could not reach a valid sequence; reported per row."""


class ConstraintAdapter:
    """Maps the automaton's word-level candidate sets to model token ids.

    With the word-level vocabulary each grammar token is one model token; a
    subword model would plug a subword-to-word mapping in here instead.
    """

    def __init__(self, vocab: WordVocab, sentence: Sentence, schema: DecodingSchema):
        self.vocab = vocab
        self.sentence = sentence
        self.schema = schema

    def allowed_ids(self, state: DecoderState) -> tuple[list[int], bool]:
        allowed = next_allowed(state, self.sentence, self.schema)
        end_ok = is_end_legal(state, self.schema)
        ids = sorted(
            self.vocab.index[tok]
            for tok in allowed
            if tok is not END and tok in self.vocab
        )
        return ids, end_ok

    def advance(self, state: DecoderState, token_id: int) -> DecoderState:
        return step(state, self.vocab.tokens[token_id], self.sentence, self.schema)


@torch.no_grad()
def generate_constrained(
    model,
    vocab: WordVocab,
    input_text: str,
    sentence: Sentence,
    schema: DecodingSchema,
    max_steps: int = 64,
) -> str:
    """Greedy decoding under the grammar mask; the output always satisfies
    the reference validator or a GenerationError is raised."""
    model.eval()
    adapter = ConstraintAdapter(vocab, sentence, schema)
    input_ids = torch.tensor([vocab.encode(input_text)], dtype=torch.long)
    decoder_ids = [PAD_ID]  # decoder start token
    state = DecoderState()
    generated: list[str] = []
    encoder_outputs = model.get_encoder()(input_ids=input_ids)

    for _ in range(max_steps):
        allowed, end_ok = adapter.allowed_ids(state)
        if not allowed and not end_ok:
            raise GenerationError(
                f"no in-vocabulary continuation for state {state} of {input_text!r}"
            )
        logits = model(
            encoder_outputs=encoder_outputs,
            decoder_input_ids=torch.tensor([decoder_ids], dtype=torch.long),
        ).logits[0, -1]
        mask = torch.full_like(logits, float("-inf"))
        if allowed:
            mask[allowed] = 0.0
        if end_ok:
            mask[EOS_ID] = 0.0
        choice = int(torch.argmax(logits + mask))
        if choice == EOS_ID:
            return " ".join(generated)
        state = adapter.advance(state, choice)
        generated.append(vocab.tokens[choice])
        decoder_ids.append(choice)

    # step cap: close the grammar deterministically, preferring the marker
    # that advances to the next field over more span content
    structural = {"[A]", "[C]", "[O]", "[S]"}
    for _ in range(32):
        allowed, end_ok = adapter.allowed_ids(state)
        if end_ok:
            return " ".join(generated)
        if not allowed:
            break
        markers = [i for i in allowed if vocab.tokens[i] in structural]
        choice = markers[0] if markers else allowed[0]
        state = adapter.advance(state, choice)
        generated.append(vocab.tokens[choice])
    raise GenerationError(f"step cap exceeded without legal end for {input_text!r}")

import pytest
from hypothesis import given, settings, strategies as st

from quadkit.augmentation import (
    OrderTemplate,
    enumerate_quad_orders,
    render_quad_instance,
)
from quadkit.core import Quad, Sentence
from quadkit.decoding import (
    END,
    AutomatonError,
    DecoderState,
    DecodingSchema,
    GoldGreedyProvider,
    RandomProposalProvider,
    constrained_generate,
    is_end_legal,
    next_allowed,
    scan,
    validate_marker_skeleton,
    validate_sequence,
)
from quadkit.inference import parse_target

from oracles import legal_strings

PIZZA = Sentence("p0", "The pizza is delicious.")
PIZZA_QUAD = Quad("pizza", "food quality", "delicious", "positive")
TAXONOMY = ("food quality", "service general", "food prices")
ACOS = OrderTemplate.from_surface("[A][C][O][S]")


def schema(order=ACOS, categories=TAXONOMY, strict=False):
    return DecodingSchema(categories=categories, order=order, strict_spans=strict)


class TestNextAllowed:
    def test_after_s_marker_sentiment_words(self):
        state = scan(["[A]", "pizza", "[C]", "food", "quality", "[O]", "delicious", "[S]"],
                     PIZZA, schema())
        assert next_allowed(state, PIZZA, schema()) == {"great", "bad", "ok"}

    def test_after_a_marker_sentence_tokens_plus_it(self):
        state = scan(["[A]"], PIZZA, schema())
        allowed = next_allowed(state, PIZZA, schema())
        assert {"The", "pizza", "is", "delicious."} <= allowed
        assert "it" in allowed
        # no marker may close an empty field
        assert "[C]" not in allowed

    def test_punctuation_stripped_variant_included(self):
        state = scan(["[A]"], PIZZA, schema())
        assert "delicious" in next_allowed(state, PIZZA, schema())

    def test_after_ssep_first_marker_only(self):
        tokens = "[A] pizza [C] food quality [O] delicious [S] great [SSEP]".split()
        state = scan(tokens, PIZZA, schema())
        assert next_allowed(state, PIZZA, schema()) == {"[A]"}
        assert state.quad_index == 1

    def test_initial_state_expects_first_marker(self):
        assert next_allowed(DecoderState(), PIZZA, schema()) == {"[A]"}
        other = schema(order=OrderTemplate.from_surface("[S][O][C][A]"))
        assert next_allowed(DecoderState(), PIZZA, other) == {"[S]"}

    def test_category_trie_continuations(self):
        state = scan(["[A]", "pizza", "[C]", "food"], PIZZA, schema())
        allowed = next_allowed(state, PIZZA, schema())
        # "food" alone is not a category; only its continuations are legal
        assert allowed == {"quality", "prices"}

    def test_complete_category_allows_next_marker(self):
        state = scan(["[A]", "pizza", "[C]", "food", "quality"], PIZZA, schema())
        assert "[O]" in next_allowed(state, PIZZA, schema())

    def test_end_after_last_field(self):
        tokens = "[A] pizza [C] food quality [O] delicious [S] great".split()
        state = scan(tokens, PIZZA, schema())
        assert is_end_legal(state, schema())
        assert next_allowed(state, PIZZA, schema()) == {"[SSEP]", END}

    def test_span_field_mixes_content_and_follower(self):
        state = scan(["[A]", "pizza"], PIZZA, schema())
        allowed = next_allowed(state, PIZZA, schema())
        assert "[C]" in allowed
        assert "pizza" in allowed  # spans may repeat tokens

    def test_current_field_names(self):
        sch = schema()
        assert DecoderState().current_field(sch) == "boundary"
        assert scan(["[A]"], PIZZA, sch).current_field(sch) == "A"
        assert scan(["[A]", "pizza", "[C]"], PIZZA, sch).current_field(sch) == "C"

    def test_inconsistent_state_errors(self):
        with pytest.raises(AutomatonError):
            next_allowed(DecoderState(field_pos=7), PIZZA, schema())

    def test_strict_spans_require_contiguity(self):
        sch = schema(strict=True)
        state = scan(["[A]", "The", "pizza"], PIZZA, sch)
        allowed = next_allowed(state, PIZZA, sch)
        assert "is" in allowed
        assert "delicious." not in allowed  # "The pizza delicious." is not contiguous
        assert "[C]" in allowed


class TestValidateSequence:
    def test_paper_target_valid(self):
        result = validate_sequence(
            "[A] pizza [C] food quality [O] delicious [S] great", PIZZA, schema()
        )
        assert result.valid

    def test_out_of_schema_sentiment_invalid(self):
        result = validate_sequence(
            "[A] pizza [C] food quality [O] delicious [S] amazing", PIZZA, schema()
        )
        assert not result.valid
        assert result.error_index == 8

    def test_wrong_marker_order_invalid_at_zero(self):
        result = validate_sequence(
            "[C] food quality [A] pizza [O] delicious [S] great", PIZZA, schema()
        )
        assert not result.valid
        assert result.error_index == 0

    def test_truncated_sequence_invalid_at_end(self):
        target = "[A] pizza [C] food quality [O] delicious [S]"
        result = validate_sequence(target, PIZZA, schema())
        assert not result.valid
        assert result.error_index == len(target.split())

    def test_empty_target_invalid(self):
        assert not validate_sequence("", PIZZA, schema()).valid

    def test_trailing_ssep_invalid(self):
        target = "[A] pizza [C] food quality [O] delicious [S] great [SSEP]"
        assert not validate_sequence(target, PIZZA, schema()).valid

    def test_two_quads_valid(self):
        target = (
            "[A] pizza [C] food quality [O] delicious [S] great"
            " [SSEP] [A] it [C] service general [O] it [S] ok"
        )
        assert validate_sequence(target, PIZZA, schema()).valid

    def test_out_of_sentence_span_invalid(self):
        result = validate_sequence(
            "[A] burger [C] food quality [O] delicious [S] great", PIZZA, schema()
        )
        assert not result.valid
        assert result.error_index == 1

    def test_strict_rejects_non_contiguous_span(self):
        loose = "[A] The delicious. [C] food quality [O] is [S] great"
        assert validate_sequence(loose, PIZZA, schema()).valid
        assert not validate_sequence(loose, PIZZA, schema(strict=True)).valid

    def test_renders_always_validate(self, toy_dataset):
        taxonomy = toy_dataset.categories()
        for template in enumerate_quad_orders():
            sch = DecodingSchema(categories=taxonomy, order=template)
            for sentence, quads in toy_dataset.sentences:
                if not quads:
                    continue
                inst = render_quad_instance(sentence, quads, template)
                result = validate_sequence(inst.target, sentence, sch)
                assert result.valid, (inst.target, result)


class TestExhaustiveEquivalence:
    """The validator against an independent grammar enumerator, both
    directions, on a tiny schema."""

    SENT = Sentence("t", "x1 x2")
    CATS = ("c1", "c1 c2")
    MAX = 10

    def _schema(self):
        return schema(categories=self.CATS)

    def _walk_accepted(self, max_len):
        """Enumerate every token sequence the automaton accepts, by walking
        allowed transitions."""
        sch = self._schema()
        accepted = []
        stack = [((), DecoderState())]
        while stack:
            tokens, state = stack.pop()
            if is_end_legal(state, sch):
                accepted.append(tokens)
            if len(tokens) == max_len:
                continue
            allowed = next_allowed(state, self.SENT, sch)
            assert allowed, f"empty allowed set at {tokens}"
            for tok in allowed:
                if tok is END:
                    continue
                stack.append((tokens + (tok,), scan([tok], self.SENT, sch)))
        return accepted

    def _walk_accepted_fast(self, max_len):
        sch = self._schema()
        accepted = []
        stack = [((), DecoderState())]
        from quadkit.decoding import step

        while stack:
            tokens, state = stack.pop()
            if is_end_legal(state, sch):
                accepted.append(tokens)
            if len(tokens) == max_len:
                continue
            for tok in next_allowed(state, self.SENT, sch):
                if tok is END:
                    continue
                stack.append((tokens + (tok,), step(state, tok, self.SENT, sch)))
        return accepted

    def test_validator_equals_enumerator(self):
        oracle = legal_strings("ACOS", ("x1", "x2"), self.CATS, self.MAX)
        # every independently enumerated legal string validates
        for tokens in oracle:
            assert validate_sequence(" ".join(tokens), self.SENT, self._schema()).valid
        # every string the automaton accepts is independently legal
        accepted = self._walk_accepted_fast(self.MAX)
        assert len(accepted) == len(set(accepted))
        assert set(accepted) == oracle

    def test_near_miss_strings_rejected(self):
        sch = self._schema()
        bad = [
            "[A] x1 [C] c1 [O] x2 [S]",
            "[A] x1 [C] c1 [O] x2 [S] c1",
            "[A] x1 [C] c2 [O] x2 [S] ok",
            "[A] x1 [C] c1 c1 [O] x2 [S] ok",
            "[A] [C] c1 [O] x2 [S] ok",
            "x1 [A] x1 [C] c1 [O] x2 [S] ok",
            "[A] x1 [C] c1 [O] x2 [S] ok [SSEP]",
            "[A] x1 [O] x2 [C] c1 [S] ok",
        ]
        for target in bad:
            assert not validate_sequence(target, self.SENT, sch).valid, target


def _provider_vocab(sch, sentence):
    vocab = set(sentence.tokens()) | {"it", "[SSEP]"}
    vocab |= {w for c in sch.categories for w in c.split()}
    vocab |= set(sch.sentiment_words)
    vocab |= {m.surface for m in type(sch.order.order[0])}
    vocab |= {"junk", "zzz"}  # out-of-schema noise
    return vocab


class TestConstrainedGenerate:
    def test_random_providers_always_valid(self):
        sch = schema()
        vocab = _provider_vocab(sch, PIZZA)
        for seed in range(100):
            provider = RandomProposalProvider(seed=seed, vocabulary=vocab)
            out = constrained_generate("prompt", PIZZA, sch, provider, beam=1, step_cap=64)
            assert validate_sequence(out, PIZZA, sch).valid, (seed, out)

    def test_gold_greedy_reproduces_gold(self, toy_dataset):
        taxonomy = toy_dataset.categories()
        for template in enumerate_quad_orders()[:6]:
            sch = DecodingSchema(categories=taxonomy, order=template)
            gold = {}
            for sentence, quads in toy_dataset.sentences:
                inst = render_quad_instance(sentence, quads, template)
                gold[inst.input] = inst.target
            provider = GoldGreedyProvider(gold)
            for sentence, quads in toy_dataset.sentences:
                inst = render_quad_instance(sentence, quads, template)
                out = constrained_generate(inst.input, sentence, sch, provider)
                assert out == inst.target

    def test_junk_only_provider_still_valid(self):
        class Junk:
            def propose(self, input, consumed):
                return {"zzz": 5.0, "@@@": 4.0}

        sch = schema()
        out = constrained_generate("prompt", PIZZA, sch, Junk(), beam=1, step_cap=64)
        result = validate_sequence(out, PIZZA, sch)
        assert result.valid, out
        # forced path: markers plus the lexicographically smallest fillers
        assert out.split()[0] == "[A]"

    def test_junk_provider_exhaustive_toy_paths(self):
        # every deterministic forced path on a tiny schema stays in-schema
        sent = Sentence("t", "x1 x2")
        sch = schema(categories=("c1", "c1 c2"))

        class Junk:
            def propose(self, input, consumed):
                return {"@@@": 1.0}

        for beam in (1, 2, 3):
            for cap in range(1, 24):
                out = constrained_generate("p", sent, sch, Junk(), beam=beam, step_cap=cap)
                assert validate_sequence(out, sent, sch).valid, (beam, cap, out)

    def test_beam_width_gold(self, toy_dataset):
        template = ACOS
        sch = DecodingSchema(categories=toy_dataset.categories(), order=template)
        sentence, quads = toy_dataset.sentences[1]
        inst = render_quad_instance(sentence, quads, template)
        provider = GoldGreedyProvider({inst.input: inst.target})
        assert constrained_generate(inst.input, sentence, sch, provider, beam=4) == inst.target

    def test_step_cap_forces_closure(self):
        class MoreContent:
            def propose(self, input, consumed):
                return {"pizza": 1.0}

        sch = schema()
        out = constrained_generate("p", PIZZA, sch, MoreContent(), beam=1, step_cap=6)
        assert validate_sequence(out, PIZZA, sch).valid

    def test_bad_beam_rejected(self):
        with pytest.raises(ValueError):
            constrained_generate("p", PIZZA, schema(), GoldGreedyProvider({}), beam=0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(4, 40))
    def test_soundness_property(self, seed, beam, cap):
        sch = schema()
        provider = RandomProposalProvider(seed=seed, vocabulary=_provider_vocab(sch, PIZZA))
        out = constrained_generate("prompt", PIZZA, sch, provider, beam=beam, step_cap=cap)
        assert validate_sequence(out, PIZZA, sch).valid

    def test_generated_parse_back(self):
        sch = schema()
        provider = RandomProposalProvider(seed=3, vocabulary=_provider_vocab(sch, PIZZA))
        out = constrained_generate("prompt", PIZZA, sch, provider, step_cap=64)
        parsed = parse_target(out, ACOS)
        assert parsed.quads and not parsed.diagnostics


class TestSchemaValidation:
    def test_empty_taxonomy_rejected(self):
        with pytest.raises(ValueError):
            DecodingSchema(categories=(), order=ACOS)

    def test_marker_collision_rejected(self):
        with pytest.raises(ValueError):
            DecodingSchema(categories=("food [A] quality",), order=ACOS)

    def test_wrong_sentiment_set_rejected(self):
        with pytest.raises(ValueError):
            DecodingSchema(categories=TAXONOMY, order=ACOS, sentiment_words=frozenset({"great"}))


class TestMarkerSkeleton:
    def test_pairwise_target_passes(self):
        target = "[AO] pizza is delicious [CS] food quality is great"
        assert validate_marker_skeleton(target, ["[AO]", "[CS]"]).valid

    def test_overall_target_passes(self):
        target = "[CSAO] The food quality is great because pizza is delicious"
        assert validate_marker_skeleton(target, ["[CSAO]"]).valid

    def test_multi_quad_skeleton(self):
        target = "[AS] pizza is great [SSEP] [AS] wine is bad"
        assert validate_marker_skeleton(target, ["[AS]"]).valid

    def test_missing_marker_fails(self):
        assert not validate_marker_skeleton("[AO] pizza is delicious", ["[AO]", "[CS]"]).valid

    def test_empty_field_fails(self):
        assert not validate_marker_skeleton("[AO] [CS] x is y", ["[AO]", "[CS]"]).valid

    def test_unexpected_marker_fails(self):
        assert not validate_marker_skeleton("[AO] x [A] y", ["[AO]"]).valid

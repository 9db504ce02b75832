import random

import pytest
import torch

from quadharness.config import HarnessConfig, HarnessConfigError
from quadharness.data import corpus_vocab, group_by_task, load_corpus, stratified_batches
from quadharness.generate import generate_constrained
from quadharness.model import build_model
from quadharness.train import MissingTaskGroupError, step_objective
from quadharness.vocab import EOS_ID, PAD_ID, UNK_ID, WordVocab

from quadkit.augmentation import OrderTemplate
from quadkit.core import Sentence
from quadkit.decoding import DecodingSchema, validate_sequence
from quadkit.objective import balanced_contribution_loss, pooled_sum_loss


class TestVocab:
    def test_round_trip(self):
        vocab = WordVocab.build(["the pizza was fresh .", "[A] pizza [S] great"])
        text = "pizza was fresh"
        assert vocab.decode(vocab.encode(text)) == text

    def test_specials(self):
        vocab = WordVocab.build(["a b"])
        assert vocab.tokens[PAD_ID] == "<pad>"
        assert vocab.tokens[EOS_ID] == "</s>"
        assert vocab.encode("a")[-1] == EOS_ID
        assert vocab.encode("zzz", append_eos=False) == [UNK_ID]

    def test_save_load(self, tmp_path):
        vocab = WordVocab.build(["x y z"])
        vocab.save(tmp_path / "v.json")
        again = WordVocab.load(tmp_path / "v.json")
        assert again.tokens == vocab.tokens


class TestCorpus:
    def test_task_counts(self, fixture_env):
        vocab = corpus_vocab(fixture_env["corpus"])
        items = load_corpus(fixture_env["corpus"], vocab)
        groups = group_by_task(items)
        assert len(groups["quad"]) == 250
        assert len(groups["pairwise"]) == 250
        assert len(groups["overall"]) == 50

    def test_every_batch_has_all_tasks(self, fixture_env):
        vocab = corpus_vocab(fixture_env["corpus"])
        items = load_corpus(fixture_env["corpus"], vocab)
        rng = random.Random(0)
        batches = list(stratified_batches(items, 32, rng))
        assert len(batches) >= len(items) // 32
        for batch in batches:
            tasks = {it.task for it in batch}
            assert tasks == {"quad", "pairwise", "overall"}

    def test_corpus_targets_in_vocab(self, fixture_env):
        vocab = corpus_vocab(fixture_env["corpus"])
        items = load_corpus(fixture_env["corpus"], vocab)
        for item in items:
            assert UNK_ID not in item.label_ids


class TestObjectiveAgreement:
    def test_bcl_matches_reference(self):
        losses = torch.tensor([1.0, 2.0, 3.0, 2.0, 2.0, 4.0])
        tasks = ["quad", "quad", "quad", "pairwise", "pairwise", "overall"]
        got = step_objective(losses, tasks, "bcl").item()
        ref = balanced_contribution_loss([1, 2, 3], [2, 2], [4]).total
        assert got == pytest.approx(ref, abs=1e-6)

    def test_pooled_matches_reference(self):
        losses = torch.tensor([1.0, 2.0, 3.0, 2.0, 2.0, 4.0])
        tasks = ["quad"] * 3 + ["pairwise"] * 2 + ["overall"]
        got = step_objective(losses, tasks, "pooled").item()
        ref = pooled_sum_loss([1, 2, 3], [2, 2], [4])
        assert got == pytest.approx(ref, abs=1e-6)

    def test_missing_group_aborts(self):
        losses = torch.tensor([1.0, 2.0])
        with pytest.raises(MissingTaskGroupError, match="overall"):
            step_objective(losses, ["quad", "pairwise"], "bcl")


class TestConfig:
    def test_defaults(self):
        cfg = HarnessConfig()
        assert cfg.epochs == 20
        assert cfg.batch_size == 64
        assert cfg.learning_rate == 1e-4
        assert cfg.optimizer == "adamw"
        assert cfg.loss_mode == "bcl"

    def test_bad_loss_mode(self):
        with pytest.raises(HarnessConfigError):
            HarnessConfig(loss_mode="mean").validate()

    def test_override(self):
        cfg = HarnessConfig().override(epochs=3, corpus=None)
        assert cfg.epochs == 3
        assert cfg.corpus is None


class TestUntrainedGeneration:
    def test_random_weights_still_emit_valid_sequences(self, fixture_env):
        vocab = corpus_vocab(fixture_env["corpus"])
        cfg = HarnessConfig(seed=3)
        model = build_model(vocab, cfg)
        sentence = Sentence("s", "the pizza was fresh .")
        schema = DecodingSchema(
            categories=("food quality", "service general"),
            order=OrderTemplate.from_surface("[A][C][O][S]"),
        )
        out = generate_constrained(model, vocab, "Quad Prediction: the pizza was fresh . [A][C][O][S]",
                                   sentence, schema)
        assert validate_sequence(out, sentence, schema).valid, out

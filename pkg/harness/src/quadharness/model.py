"""Model construction and checkpointing.

The default "tiny" model is a randomly initialized T5 encoder-decoder over
the word-level corpus vocabulary, small enough to overfit fixtures on CPU
in minutes; a locally available pretrained checkpoint can be swapped in via
the ``model`` config field.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from transformers import T5Config, T5ForConditionalGeneration

from .config import HarnessConfig
from .vocab import EOS_ID, PAD_ID, WordVocab

WEIGHTS_FILE = "model.pt"
VOCAB_FILE = "vocab.json"
CONFIG_FILE = "harness_config.json"


def build_tiny_model(vocab_size: int, config: HarnessConfig) -> T5ForConditionalGeneration:
    torch.manual_seed(config.seed)
    t5_config = T5Config(
        vocab_size=vocab_size,
        d_model=config.d_model,
        d_ff=config.d_ff,
        d_kv=config.d_kv,
        num_layers=config.num_layers,
        num_decoder_layers=config.num_layers,
        num_heads=config.num_heads,
        dropout_rate=0.0,
        pad_token_id=PAD_ID,
        eos_token_id=EOS_ID,
        decoder_start_token_id=PAD_ID,
        tie_word_embeddings=True,
    )
    return T5ForConditionalGeneration(t5_config)


def build_model(vocab: WordVocab, config: HarnessConfig) -> T5ForConditionalGeneration:
    if config.model == "tiny":
        return build_tiny_model(len(vocab), config)
    # a local pretrained checkpoint; its own subword vocabulary would need a
    # subword-to-word adapter, so we resize to the word vocabulary instead
    model = T5ForConditionalGeneration.from_pretrained(config.model)
    model.resize_token_embeddings(len(vocab))
    return model


def save_checkpoint(
    out_dir: str | Path,
    model: T5ForConditionalGeneration,
    vocab: WordVocab,
    config: HarnessConfig,
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / WEIGHTS_FILE)
    vocab.save(out / VOCAB_FILE)
    (out / CONFIG_FILE).write_text(
        json.dumps(config.to_json(), indent=2, sort_keys=True), encoding="utf-8"
    )
    return out


def load_checkpoint(
    checkpoint_dir: str | Path,
) -> tuple[T5ForConditionalGeneration, WordVocab, HarnessConfig]:
    ckpt = Path(checkpoint_dir)
    config = HarnessConfig(**json.loads((ckpt / CONFIG_FILE).read_text(encoding="utf-8")))
    vocab = WordVocab.load(ckpt / VOCAB_FILE)
    model = build_model(vocab, config)
    state = torch.load(ckpt / WEIGHTS_FILE, map_location="cpu", weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model, vocab, config

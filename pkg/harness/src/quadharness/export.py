"""Exporters producing the interchange files the quadkit pipeline consumes:
per-sentence order scores and per-(sentence, order) prediction sequences."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

import torch

from quadkit.augmentation import OrderTemplate
from quadkit.dataset_io import load_canonical, load_taxonomy
from quadkit.decoding import DecodingSchema

from .data import load_corpus
from .generate import GenerationError, generate_constrained
from .train import per_instance_losses
from .vocab import WordVocab


def _atomic_write(path: str | Path, lines: Iterable[str]) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@torch.no_grad()
def export_scores(
    model,
    vocab: WordVocab,
    corpus_path: str | Path,
    out_path: str | Path,
    batch_size: int = 64,
) -> int:
    """One score row per quad-task corpus row: the length-normalized target
    log-likelihood (negated mean token NLL)."""
    model.eval()
    items = [it for it in load_corpus(corpus_path, vocab) if it.task == "quad"]
    if not items:
        raise ValueError(f"no quad-task rows in {corpus_path}")
    lines = []
    for start in range(0, len(items), batch_size):
        chunk = items[start : start + batch_size]
        losses = per_instance_losses(model, chunk, torch.device("cpu"))
        for item, nll in zip(chunk, losses.tolist()):
            lines.append(
                json.dumps(
                    {"order": item.order, "source_id": item.source_id, "score": -nll},
                    ensure_ascii=False,
                )
            )
    _atomic_write(out_path, lines)
    return len(lines)


def export_predictions(
    model,
    vocab: WordVocab,
    corpus_path: str | Path,
    data_path: str | Path,
    out_path: str | Path,
    taxonomy_path: str | Path | None = None,
    orders: list[str] | None = None,
    max_steps: int = 64,
) -> tuple[int, list[str]]:
    """Constrained generation for every quad-task row of the corpus (or only
    the given order surfaces); returns (row count, per-row diagnostics)."""
    model.eval()
    dataset = load_canonical(data_path)
    sentences = {s.id: s for s, _ in dataset.sentences}
    categories = (
        load_taxonomy(taxonomy_path) if taxonomy_path else dataset.categories()
    )
    items = [it for it in load_corpus(corpus_path, vocab) if it.task == "quad"]
    if orders is not None:
        wanted = set(orders)
        items = [it for it in items if it.order in wanted]
    if not items:
        raise ValueError("no quad-task rows selected for prediction export")

    schemas: dict[str, DecodingSchema] = {}
    lines = []
    diagnostics = []
    for item in sorted(items, key=lambda it: (it.source_id, it.order)):
        sentence = sentences.get(item.source_id)
        if sentence is None:
            diagnostics.append(f"{item.source_id}: not in {data_path}")
            continue
        schema = schemas.get(item.order)
        if schema is None:
            schema = DecodingSchema(
                categories=categories, order=OrderTemplate.from_surface(item.order)
            )
            schemas[item.order] = schema
        try:
            sequence = generate_constrained(
                model, vocab, item.input_text, sentence, schema, max_steps=max_steps
            )
        except GenerationError as exc:
            diagnostics.append(f"{item.source_id} {item.order}: {exc}")
            continue
        lines.append(
            json.dumps(
                {"source_id": item.source_id, "order": item.order, "sequence": sequence},
                ensure_ascii=False,
            )
        )
    _atomic_write(out_path, lines)
    return len(lines), diagnostics

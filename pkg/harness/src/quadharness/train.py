"""Training loop: per-instance loss is the mean token negative
log-likelihood of the target; the step objective is either the sum of
per-task means (balanced) or the plain pooled mean, matching the reference
loss functions exposed by the quadkit ``loss-check`` verb."""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import torch
import torch.nn.functional as F

from .config import HarnessConfig
from .data import (
    TASKS,
    TrainItem,
    corpus_vocab,
    group_by_task,
    load_corpus,
    stratified_batches,
)
from .model import build_model, save_checkpoint
from .vocab import PAD_ID, WordVocab

LOSS_CURVE_FILE = "loss_curve.jsonl"


class MissingTaskGroupError(RuntimeError):
    """A balanced-loss step saw no instances for some task; aborting matches
    the reference objective's empty-group semantics."""


def _pad_batch(items: list[TrainItem], device: torch.device):
    max_in = max(len(it.input_ids) for it in items)
    max_lab = max(len(it.label_ids) for it in items)
    input_ids = torch.full((len(items), max_in), PAD_ID, dtype=torch.long)
    attention = torch.zeros((len(items), max_in), dtype=torch.long)
    labels = torch.full((len(items), max_lab), -100, dtype=torch.long)
    for i, it in enumerate(items):
        input_ids[i, : len(it.input_ids)] = torch.tensor(it.input_ids)
        attention[i, : len(it.input_ids)] = 1
        labels[i, : len(it.label_ids)] = torch.tensor(it.label_ids)
    return input_ids.to(device), attention.to(device), labels.to(device)


def per_instance_losses(model, items: list[TrainItem], device) -> torch.Tensor:
    """Mean token NLL of each item's target (end token included)."""
    input_ids, attention, labels = _pad_batch(items, device)
    logits = model(input_ids=input_ids, attention_mask=attention, labels=labels).logits
    token_nll = F.cross_entropy(
        logits.transpose(1, 2), labels, reduction="none", ignore_index=-100
    )
    mask = (labels != -100).float()
    return (token_nll * mask).sum(dim=1) / mask.sum(dim=1)


def step_objective(losses: torch.Tensor, tasks: list[str], mode: str) -> torch.Tensor:
    if mode == "pooled":
        return losses.mean()
    total = None
    for task in TASKS:
        idx = [i for i, t in enumerate(tasks) if t == task]
        if not idx:
            raise MissingTaskGroupError(
                f"balanced loss step has no {task!r} instances; fix batch assembly"
            )
        group_mean = losses[idx].mean()
        total = group_mean if total is None else total + group_mean
    return total


def train(config: HarnessConfig) -> dict:
    """Fit the model on the corpus; returns the epoch history and writes the
    checkpoint plus a loss-curve log into ``config.out_dir``."""
    config.validate()
    if not config.corpus:
        raise ValueError("config.corpus is required for training")
    torch.manual_seed(config.seed)
    device = torch.device("cpu")

    vocab = corpus_vocab(config.corpus)
    items = load_corpus(config.corpus, vocab)
    present = group_by_task(items)
    if config.loss_mode == "bcl" and set(present) != set(TASKS):
        missing = sorted(set(TASKS) - set(present))
        raise MissingTaskGroupError(
            f"balanced loss needs all task groups in the corpus; missing {missing}"
        )

    model = build_model(vocab, config).to(device)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    rng = random.Random(config.seed)

    history = []
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / LOSS_CURVE_FILE
    with open(curve_path, "w", encoding="utf-8") as curve:
        for epoch in range(1, config.epochs + 1):
            epoch_losses: dict[str, list[float]] = {t: [] for t in present}
            for batch in stratified_batches(items, config.batch_size, rng):
                optimizer.zero_grad()
                losses = per_instance_losses(model, batch, device)
                tasks = [it.task for it in batch]
                objective = step_objective(losses, tasks, config.loss_mode)
                objective.backward()
                optimizer.step()
                for value, task in zip(losses.tolist(), tasks):
                    epoch_losses[task].append(value)
            all_losses = [v for group in epoch_losses.values() for v in group]
            record = {
                "epoch": epoch,
                "mean_loss": math.fsum(all_losses) / len(all_losses),
                **{
                    f"{task}_mean": math.fsum(group) / len(group)
                    for task, group in epoch_losses.items()
                },
            }
            history.append(record)
            curve.write(json.dumps(record) + "\n")
    model.eval()
    save_checkpoint(out_dir, model, vocab, config)
    return {"history": history, "checkpoint": str(out_dir)}


@torch.no_grad()
def dump_per_instance_losses(model, vocab: WordVocab, corpus_path, out_path, batch_size=64):
    """Evaluate per-instance losses over a corpus and write the grouped dump
    consumed by the reference ``loss-check`` verb, including both totals."""
    model.eval()
    items = load_corpus(corpus_path, vocab)
    groups: dict[str, list[float]] = {t: [] for t in TASKS}
    for start in range(0, len(items), batch_size):
        chunk = items[start : start + batch_size]
        losses = per_instance_losses(model, chunk, torch.device("cpu"))
        for value, item in zip(losses.tolist(), chunk):
            groups[item.task].append(value)
    groups = {t: g for t, g in groups.items() if g}
    payload = dict(groups)
    if set(groups) == set(TASKS):
        payload["bcl"] = math.fsum(
            math.fsum(g) / len(g) for g in groups.values()
        )
    pooled = [v for g in groups.values() for v in g]
    payload["pooled"] = math.fsum(pooled) / len(pooled)
    Path(out_path).write_text(json.dumps(payload), encoding="utf-8")
    return payload

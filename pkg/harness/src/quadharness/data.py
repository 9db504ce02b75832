"""Corpus loading and stratified batch assembly.

The balanced loss needs every task group present in every step, so batches
are assembled with a per-task share proportional to the task's corpus
share (at least one instance each); short task queues wrap around within
the epoch rather than starving later batches.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .vocab import WordVocab

TASKS = ("quad", "pairwise", "overall")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class TrainItem:
    task: str
    source_id: str
    order: str
    input_text: str
    target_text: str
    input_ids: tuple[int, ...]
    label_ids: tuple[int, ...]


def load_corpus(path: str | Path, vocab: WordVocab) -> list[TrainItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if row["task"] not in TASKS:
                raise CorpusError(f"unknown task {row['task']!r}")
            items.append(
                TrainItem(
                    task=row["task"],
                    source_id=str(row["source_id"]),
                    order=row["order"],
                    input_text=row["input"],
                    target_text=row["target"],
                    input_ids=tuple(vocab.encode(row["input"])),
                    label_ids=tuple(vocab.encode(row["target"])),
                )
            )
    if not items:
        raise CorpusError(f"empty corpus: {path}")
    return items


def corpus_vocab(path: str | Path) -> WordVocab:
    texts = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                texts.append(row["input"])
                texts.append(row["target"])
    return WordVocab.build(texts)


def group_by_task(items: list[TrainItem]) -> dict[str, list[TrainItem]]:
    groups: dict[str, list[TrainItem]] = {t: [] for t in TASKS}
    for item in items:
        groups[item.task].append(item)
    return {t: g for t, g in groups.items() if g}


def stratified_batches(
    items: list[TrainItem], batch_size: int, rng: random.Random
) -> Iterator[list[TrainItem]]:
    """Batches covering every present task; order reshuffled per call."""
    groups = group_by_task(items)
    total = len(items)
    n_batches = max(1, -(-total // batch_size))
    shares = {}
    for task, group in groups.items():
        shares[task] = max(1, round(batch_size * len(group) / total))
    queues = {}
    offsets = {}
    for task, group in groups.items():
        shuffled = list(group)
        rng.shuffle(shuffled)
        queues[task] = shuffled
        offsets[task] = 0
    for _ in range(n_batches):
        batch = []
        for task, queue in queues.items():
            for _ in range(shares[task]):
                batch.append(queue[offsets[task] % len(queue)])
                offsets[task] += 1
        yield batch

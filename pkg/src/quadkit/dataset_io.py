"""Parsing of ``####``-separated ASQP/ACOS data files, canonical JSONL
serialization, taxonomy handling and corpus statistics."""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .core import POLARITIES, Quad, Sentence

SEPARATOR = "####"

# Canonical element order; files may declare any permutation of "acos".
DEFAULT_ELEMENT_ORDER = "acos"


class DatasetParseError(ValueError):
    """Raised for malformed dataset files; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class DatasetStats:
    n_sentences: int
    n_quads: int


@dataclass
class Dataset:
    name: str
    split: str
    sentences: list[tuple[Sentence, list[Quad]]]

    def __post_init__(self) -> None:
        ids = [s.id for s, _ in self.sentences]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate sentence ids: {dupes}")

    def categories(self) -> tuple[str, ...]:
        """Taxonomy observed in this dataset, sorted for determinism."""
        return tuple(sorted({q.category for _, quads in self.sentences for q in quads}))


def _check_element_order(element_order: str) -> str:
    order = element_order.lower()
    if sorted(order) != sorted(DEFAULT_ELEMENT_ORDER):
        raise ValueError(
            f"element order must be a permutation of 'acos', got {element_order!r}"
        )
    return order


def parse_dataset_line(
    line: str,
    element_order: str = DEFAULT_ELEMENT_ORDER,
    sentence_id: str = "0",
    line_no: int | None = None,
) -> tuple[Sentence, list[Quad]]:
    """Parse one ``<text>####<quad-list literal>`` line.

    ``element_order`` declares which in-file positions hold aspect, category,
    opinion and sentiment; quads are returned in canonical (a, c, o, s).
    """
    order = _check_element_order(element_order)
    parts = line.rstrip("\n").split(SEPARATOR)
    if len(parts) != 2:
        raise DatasetParseError(
            f"expected exactly one {SEPARATOR!r} separator, found {len(parts) - 1}",
            line_no,
        )
    text, literal = parts
    if not text.strip():
        raise DatasetParseError("empty sentence text", line_no)
    try:
        raw = ast.literal_eval(literal.strip())
    except (ValueError, SyntaxError) as exc:
        raise DatasetParseError(f"unparseable quad list literal: {exc}", line_no) from exc
    if not isinstance(raw, (list, tuple)):
        raise DatasetParseError("quad list literal is not a list", line_no)

    quads = []
    for entry in raw:
        if not isinstance(entry, (list, tuple)) or len(entry) != 4:
            raise DatasetParseError(f"quad entry is not a 4-tuple: {entry!r}", line_no)
        if not all(isinstance(x, str) for x in entry):
            raise DatasetParseError(f"quad entry has non-string elements: {entry!r}", line_no)
        by_slot = dict(zip(order, entry))
        if by_slot["s"] not in POLARITIES:
            raise DatasetParseError(f"unknown polarity {by_slot['s']!r}", line_no)
        quads.append(
            Quad(
                aspect=by_slot["a"],
                category=by_slot["c"],
                opinion=by_slot["o"],
                polarity=by_slot["s"],
            )
        )
    return Sentence(id=sentence_id, text=text), quads


def parse_dataset_file(
    path: str | Path,
    element_order: str = DEFAULT_ELEMENT_ORDER,
    name: str = "dataset",
    split: str = "train",
    id_prefix: str = "s",
) -> Dataset:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            sid = f"{id_prefix}{i:05d}"
            sentences.append(parse_dataset_line(line, element_order, sid, line_no=i + 1))
    return Dataset(name=name, split=split, sentences=sentences)


def compute_stats(dataset: Dataset) -> DatasetStats:
    return DatasetStats(
        n_sentences=len(dataset.sentences),
        n_quads=sum(len(quads) for _, quads in dataset.sentences),
    )


def quad_to_json(q: Quad) -> dict:
    return {
        "aspect": q.aspect,
        "category": q.category,
        "opinion": q.opinion,
        "polarity": q.polarity,
    }


def quad_from_json(obj: dict) -> Quad:
    return Quad(
        aspect=obj["aspect"],
        category=obj["category"],
        opinion=obj["opinion"],
        polarity=obj["polarity"],
    )


def write_canonical_jsonl(dataset: Dataset, out: TextIO) -> None:
    """One sentence per line: ``{"id", "text", "quads"}``."""
    for sentence, quads in dataset.sentences:
        row = {
            "id": sentence.id,
            "text": sentence.text,
            "quads": [quad_to_json(q) for q in quads],
        }
        out.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_canonical_jsonl(
    source: TextIO | Iterable[str],
    name: str = "dataset",
    split: str = "train",
) -> Dataset:
    sentences = []
    for i, line in enumerate(source):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            sentence = Sentence(id=str(row["id"]), text=row["text"])
            quads = [quad_from_json(q) for q in row["quads"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetParseError(f"bad canonical row: {exc}", i + 1) from exc
        sentences.append((sentence, quads))
    return Dataset(name=name, split=split, sentences=sentences)


def load_canonical(path: str | Path, name: str = "dataset", split: str = "train") -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return read_canonical_jsonl(fh, name=name, split=split)


def load_taxonomy(path: str | Path) -> tuple[str, ...]:
    """Read one category per line; blank lines ignored; order preserved
    after de-duplication."""
    seen: dict[str, None] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            cat = line.strip()
            if cat:
                seen.setdefault(cat, None)
    return tuple(seen)

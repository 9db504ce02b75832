"""Word-level vocabulary shared by the model and the constraint adapter.

Every whitespace token of the corpus becomes one model token, so the
decoding grammar's word-level candidate sets translate one-to-one into
token-id masks (no subword splitting to reconcile).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

PAD_ID = 0
EOS_ID = 1
UNK_ID = 2
SPECIALS = ("<pad>", "</s>", "<unk>")


@dataclass
class WordVocab:
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    @classmethod
    def build(cls, texts: Iterable[str]) -> "WordVocab":
        words = sorted({w for text in texts for w in text.split()})
        return cls(tokens=SPECIALS + tuple(words))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def encode(self, text: str, append_eos: bool = True) -> list[int]:
        ids = [self.index.get(w, UNK_ID) for w in text.split()]
        if append_eos:
            ids.append(EOS_ID)
        return ids

    def decode(self, ids: Iterable[int]) -> str:
        words = []
        for i in ids:
            if i == EOS_ID:
                break
            if i in (PAD_ID, UNK_ID):
                continue
            words.append(self.tokens[i])
        return " ".join(words)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"tokens": list(self.tokens)}, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "WordVocab":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(tokens=tuple(raw["tokens"]))

"""Exact-match precision/recall/F1 over predicted vs gold quad sets,
micro-aggregated across the corpus."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import Quad


class AlignmentError(ValueError):
    """Prediction and gold files cover different sentence id sets."""


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    tp: int
    n_pred: int
    n_gold: int

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "n_pred": self.n_pred,
            "n_gold": self.n_gold,
        }


def score_exact_match(
    pred: Mapping[str, Iterable[Quad]],
    gold: Mapping[str, Iterable[Quad]],
) -> EvalReport:
    """A predicted quad counts only if all four elements equal a gold quad of
    the same sentence; per-sentence sets are deduplicated before counting."""
    if set(pred) != set(gold):
        missing = sorted(set(gold) - set(pred))
        extra = sorted(set(pred) - set(gold))
        raise AlignmentError(
            f"sentence ids differ: missing from pred {missing[:5]}, "
            f"unexpected in pred {extra[:5]}"
        )
    tp = 0
    n_pred = 0
    n_gold = 0
    for sid in gold:
        pred_set = set(pred[sid])
        gold_set = set(gold[sid])
        tp += len(pred_set & gold_set)
        n_pred += len(pred_set)
        n_gold += len(gold_set)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return EvalReport(
        precision=precision, recall=recall, f1=f1, tp=tp, n_pred=n_pred, n_gold=n_gold
    )


def element_breakdown(
    pred: Mapping[str, Iterable[Quad]],
    gold: Mapping[str, Iterable[Quad]],
) -> dict:
    """Debug-only per-element hit rates; not part of the exact-match metric."""
    slots = ("aspect", "category", "opinion", "polarity")
    hits = {s: 0 for s in slots}
    total = 0
    for sid in gold:
        gold_set = set(gold[sid])
        for q in set(pred.get(sid, ())):
            total += 1
            for s in slots:
                if any(getattr(q, s) == getattr(g, s) for g in gold_set):
                    hits[s] += 1
    return {s: (hits[s] / total if total else 0.0) for s in slots}

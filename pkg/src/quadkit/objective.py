"""Reference implementations of the balanced contribution loss and the
plain pooled-mean loss it replaces, as pure functions over per-instance
negative log-likelihoods."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


class EmptyGroupError(ValueError):
    """A task group with zero instances would silently change the objective,
    so it is an error rather than a zero term."""


@dataclass(frozen=True)
class LossBreakdown:
    quad_losses: tuple[float, ...]
    pairwise_losses: tuple[float, ...]
    overall_losses: tuple[float, ...]
    total: float


def _group_mean(values: Sequence[float], name: str) -> float:
    if not values:
        raise EmptyGroupError(f"{name} group is empty")
    for v in values:
        if v < 0:
            raise ValueError(f"{name} group has negative instance loss {v}")
    return math.fsum(values) / len(values)


def balanced_contribution_loss(
    quad: Sequence[float],
    pairwise: Sequence[float],
    overall: Sequence[float],
) -> LossBreakdown:
    """Sum of per-task mean losses, weighting each task step equally
    regardless of its instance count."""
    total = (
        _group_mean(quad, "quad")
        + _group_mean(pairwise, "pairwise")
        + _group_mean(overall, "overall")
    )
    return LossBreakdown(
        quad_losses=tuple(quad),
        pairwise_losses=tuple(pairwise),
        overall_losses=tuple(overall),
        total=total,
    )


def pooled_sum_loss(
    quad: Sequence[float],
    pairwise: Sequence[float],
    overall: Sequence[float],
) -> float:
    """Uniform-instance objective: the mean over the pooled concatenation of
    all per-instance losses."""
    pooled = list(quad) + list(pairwise) + list(overall)
    if not pooled:
        raise EmptyGroupError("no instances in any group")
    for v in pooled:
        if v < 0:
            raise ValueError(f"negative instance loss {v}")
    return math.fsum(pooled) / len(pooled)

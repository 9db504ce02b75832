"""Toolkit for aspect sentiment quad prediction: stepwise task
augmentation, order selection, constrained decoding, vote aggregation and
exact-match evaluation."""

from .augmentation import (
    OrderTemplate,
    PairwiseCandidate,
    TaskInstance,
    build_training_corpus,
    enumerate_pairwise_candidates,
    enumerate_quad_orders,
    pps_sample,
    render_overall_instance,
    render_pairwise_instance,
    render_quad_instance,
)
from .core import (
    NULL,
    ElementMarker,
    MappedQuad,
    Quad,
    Sentence,
    map_quad,
    unmap_quad,
)
from .dataset_io import Dataset, DatasetStats, compute_stats, parse_dataset_line
from .decoding import (
    END,
    DecodingSchema,
    DecoderState,
    constrained_generate,
    next_allowed,
    validate_sequence,
)
from .evaluation import EvalReport, score_exact_match
from .inference import OrderView, aggregate_votes, parse_target
from .objective import balanced_contribution_loss, pooled_sum_loss
from .order_selection import OrderScore, ToyScoreProvider, score_order, select_top_k

__version__ = "0.1.0"

__all__ = [
    "NULL",
    "Dataset",
    "DatasetStats",
    "DecoderState",
    "DecodingSchema",
    "ElementMarker",
    "EvalReport",
    "END",
    "MappedQuad",
    "OrderScore",
    "OrderTemplate",
    "OrderView",
    "PairwiseCandidate",
    "Quad",
    "Sentence",
    "TaskInstance",
    "ToyScoreProvider",
    "aggregate_votes",
    "balanced_contribution_loss",
    "build_training_corpus",
    "compute_stats",
    "constrained_generate",
    "enumerate_pairwise_candidates",
    "enumerate_quad_orders",
    "map_quad",
    "next_allowed",
    "parse_dataset_line",
    "parse_target",
    "pooled_sum_loss",
    "pps_sample",
    "render_overall_instance",
    "render_pairwise_instance",
    "render_quad_instance",
    "score_exact_match",
    "score_order",
    "select_top_k",
    "unmap_quad",
    "validate_sequence",
]

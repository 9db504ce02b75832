"""Training harness that fine-tunes a text-to-text model on the augmented
task corpus and emits score/prediction files in the quadkit interchange
formats."""

from .config import HarnessConfig
from .export import export_predictions, export_scores
from .generate import ConstraintAdapter, generate_constrained
from .model import build_model, load_checkpoint, save_checkpoint
from .train import dump_per_instance_losses, train
from .vocab import WordVocab

__version__ = "0.1.0"

__all__ = [
    "ConstraintAdapter",
    "HarnessConfig",
    "WordVocab",
    "build_model",
    "dump_per_instance_losses",
    "export_predictions",
    "export_scores",
    "generate_constrained",
    "load_checkpoint",
    "save_checkpoint",
    "train",
]

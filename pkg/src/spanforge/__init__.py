"""Cross-lingual self-training pipeline for extractive reading comprehension."""

from .corpus import AnswerSpan, Context, Dataset, Question, load_squad_json, save_squad_json
from .decoder import DecodeConfig, SpanCandidate, best_answer, decode
from .metrics import EvalReport, evaluate, exact_match, f1_score
from .pseudo_label import PseudoDataset, PseudoLabel, label
from .reader import (
    SpanDistributions,
    ToyModel,
    TrainConfig,
    Window,
    checkpoint_bytes,
    load_checkpoint,
    new_toy_model,
    predict,
    save_checkpoint,
    train,
)
from .selftrain import IterationRecord, RunConfig, finetune, load_run, self_train
from .text import TokenizedText, normalize_answer, tokenize

__version__ = "0.1.0"

__all__ = [
    "AnswerSpan",
    "Context",
    "Dataset",
    "DecodeConfig",
    "EvalReport",
    "IterationRecord",
    "PseudoDataset",
    "PseudoLabel",
    "Question",
    "RunConfig",
    "SpanCandidate",
    "SpanDistributions",
    "TokenizedText",
    "ToyModel",
    "TrainConfig",
    "Window",
    "best_answer",
    "checkpoint_bytes",
    "decode",
    "evaluate",
    "exact_match",
    "f1_score",
    "finetune",
    "label",
    "load_checkpoint",
    "load_run",
    "load_squad_json",
    "new_toy_model",
    "normalize_answer",
    "predict",
    "save_checkpoint",
    "save_squad_json",
    "self_train",
    "tokenize",
    "train",
]

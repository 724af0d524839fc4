"""Trainable reader contract plus the deterministic toy reader.

The toy reader is a linear span scorer: per context token t it builds
features [question-overlap count in a +/-2 window, token-in-question
indicator, relative position, bias], scores them with two weight vectors
and softmaxes over positions for the start and end distributions. Training
is per-gold-answer gradient ascent on the log-likelihood of the gold
start/end indices. Every float operation runs through numerics.py in a
pinned order so external reimplementations can match it bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Context, Dataset, Question
from .errors import ConfigError, ContractError, FormatError
from .numerics import SplitMix64, canonical_json, softmax
from .text import tokenize

FEATURE_DIM = 4


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 5e-5
    seed: int = 42
    max_context_tokens: int = 384
    max_question_tokens: int = 64
    doc_stride: int = 128

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0 < self.doc_stride < self.max_context_tokens:
            raise ConfigError("doc_stride must satisfy 0 < stride < max_context_tokens")
        if self.max_question_tokens < 1:
            raise ConfigError("max_question_tokens must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            # always a float so the canonical serialization is type-stable
            "learning_rate": float(self.learning_rate),
            "seed": self.seed,
            "max_context_tokens": self.max_context_tokens,
            "max_question_tokens": self.max_question_tokens,
            "doc_stride": self.doc_stride,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "TrainConfig":
        return TrainConfig(**d)


@dataclass(frozen=True)
class Window:
    token_offsets: tuple[tuple[int, int], ...]
    start_probs: tuple[float, ...]
    end_probs: tuple[float, ...]


@dataclass(frozen=True)
class SpanDistributions:
    windows: tuple[Window, ...]

    def validate(self, tol: float = 1e-6) -> None:
        for w in self.windows:
            n = len(w.token_offsets)
            if len(w.start_probs) != n or len(w.end_probs) != n:
                raise ContractError("probability length does not match token count")
            if n == 0:
                continue
            for probs in (w.start_probs, w.end_probs):
                if any(p < 0.0 for p in probs):
                    raise ContractError("negative probability")
                if abs(sum(probs) - 1.0) > tol:
                    raise ContractError("window distribution does not sum to 1")


@dataclass(frozen=True)
class ToyModel:
    w_start: tuple[float, float, float, float]
    w_end: tuple[float, float, float, float]
    config: TrainConfig
    language: str = "en"

    kind = "toy"


def new_toy_model(config: TrainConfig, language: str = "en") -> ToyModel:
    zeros = (0.0, 0.0, 0.0, 0.0)
    return ToyModel(w_start=zeros, w_end=zeros, config=config, language=language)


def checkpoint_bytes(model) -> bytes:
    """Canonical serialized form; identical inputs give identical bytes."""
    if isinstance(model, ToyModel):
        payload = {
            "kind": "toy",
            "language": model.language,
            "config": model.config.to_json_dict(),
            "w_start": list(model.w_start),
            "w_end": list(model.w_end),
        }
    else:
        payload = model.checkpoint_payload()
    return (canonical_json(payload) + "\n").encode("utf-8")


def save_checkpoint(model, path) -> None:
    Path(path).write_bytes(checkpoint_bytes(model))


def load_checkpoint(path) -> ToyModel:
    """Reload a toy checkpoint. External checkpoints are id references and
    must be rebound through the wire client instead."""
    raw = Path(path).read_bytes()
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid checkpoint JSON: {exc}") from exc
    kind = payload.get("kind")
    if kind != "toy":
        raise FormatError(
            f"{path}: cannot reload checkpoint of kind {kind!r} without its reader"
        )
    return ToyModel(
        w_start=tuple(payload["w_start"]),
        w_end=tuple(payload["w_end"]),
        config=TrainConfig.from_json_dict(payload["config"]),
        language=payload["language"],
    )


def window_starts(n_tokens: int, max_context_tokens: int, doc_stride: int) -> list[int]:
    """Window start offsets: advance by the stride until a window reaches
    the final token, inclusively."""
    if n_tokens <= max_context_tokens:
        return [0]
    starts = []
    s = 0
    while True:
        starts.append(s)
        if s + max_context_tokens >= n_tokens:
            return starts
        s += doc_stride


def question_token_set(question_text: str, language: str, max_question_tokens: int):
    toks = tokenize(question_text, language).tokens[:max_question_tokens]
    return frozenset(toks)


def token_features(tokens, qset, t: int, n: int):
    lo = t - 2 if t >= 2 else 0
    hi = t + 3 if t + 3 <= n else n
    overlap = 0.0
    for j in range(lo, hi):
        if tokens[j] in qset:
            overlap += 1.0
    in_q = 1.0 if tokens[t] in qset else 0.0
    return (overlap, in_q, t / n, 1.0)


def _scores(w, tokens, qset) -> list[float]:
    n = len(tokens)
    out = []
    for t in range(n):
        f = token_features(tokens, qset, t, n)
        acc = 0.0
        for k in range(FEATURE_DIM):
            acc += w[k] * f[k]
        out.append(acc)
    return out


def _expected_features(probs, tokens, qset) -> list[float]:
    n = len(tokens)
    ex = [0.0, 0.0, 0.0, 0.0]
    for t in range(n):
        f = token_features(tokens, qset, t, n)
        p = probs[t]
        for k in range(FEATURE_DIM):
            ex[k] += p * f[k]
    return ex


def position_log_likelihood(w, tokens, qset, gold_t: int) -> float:
    probs = softmax(_scores(w, tokens, qset))
    return math.log(probs[gold_t])


def position_gradient(w, tokens, qset, gold_t: int) -> list[float]:
    """Analytic gradient of position_log_likelihood w.r.t. w."""
    probs = softmax(_scores(w, tokens, qset))
    ex = _expected_features(probs, tokens, qset)
    fg = token_features(tokens, qset, gold_t, len(tokens))
    return [fg[k] - ex[k] for k in range(FEATURE_DIM)]


def _gold_token_span(offsets, char_start: int, char_end: int):
    s_tok = e_tok = None
    for t, (lo, hi) in enumerate(offsets):
        if s_tok is None and hi > char_start:
            s_tok = t
        if lo < char_end:
            e_tok = t
    if s_tok is None or e_tok is None or e_tok < s_tok:
        return None
    return s_tok, e_tok


@dataclass
class _Example:
    tokens: tuple[str, ...]
    qset: frozenset
    gold_start: int
    gold_end: int


def _build_examples(data: Dataset, config: TrainConfig) -> list[_Example]:
    examples: list[_Example] = []
    cache: dict[str, tuple] = {}
    for q in data.questions:
        ctx = data.context_of(q)
        if ctx.id not in cache:
            cache[ctx.id] = tokenize(ctx.text, data.language)
        tt = cache[ctx.id]
        qset = question_token_set(q.text, data.language, config.max_question_tokens)
        for span in data.golds(q.id):
            located = _gold_token_span(
                tt.offsets, span.char_start, span.char_start + len(span.text)
            )
            if located is None:
                continue
            s_tok, e_tok = located
            for ws in window_starts(
                len(tt.tokens), config.max_context_tokens, config.doc_stride
            ):
                if s_tok >= ws and e_tok < ws + config.max_context_tokens:
                    examples.append(
                        _Example(
                            tokens=tt.tokens[ws : ws + config.max_context_tokens],
                            qset=qset,
                            gold_start=s_tok - ws,
                            gold_end=e_tok - ws,
                        )
                    )
                    break
    return examples


def _sgd_step(w: list[float], tokens, qset, gold_t: int, lr: float) -> None:
    probs = softmax(_scores(w, tokens, qset))
    ex = _expected_features(probs, tokens, qset)
    fg = token_features(tokens, qset, gold_t, len(tokens))
    for k in range(FEATURE_DIM):
        w[k] += lr * (fg[k] - ex[k])


def _train_toy(model: ToyModel, data: Dataset, config: TrainConfig) -> ToyModel:
    examples = _build_examples(data, config)
    w_s = list(model.w_start)
    w_e = list(model.w_end)
    rng = SplitMix64(config.seed)
    order = list(range(len(examples)))
    for _ in range(config.epochs):
        rng.shuffle(order)
        for idx in order:
            ex = examples[idx]
            _sgd_step(w_s, ex.tokens, ex.qset, ex.gold_start, config.learning_rate)
            _sgd_step(w_e, ex.tokens, ex.qset, ex.gold_end, config.learning_rate)
    return ToyModel(
        w_start=tuple(w_s), w_end=tuple(w_e), config=config, language=data.language
    )


def train(model, data: Dataset, config: TrainConfig):
    """Train a fresh model from `model`; the input model is unmodified."""
    if not data.labeled:
        raise ContractError("train requires a labeled dataset")
    if isinstance(model, ToyModel):
        return _train_toy(model, data, config)
    return model.trained_on(data, config)


def predict(model, context: Context, question: Question, language: str | None = None) -> SpanDistributions:
    """Start/end distributions over windows of the context.

    `language` selects the tokenizer for the given context; it defaults to
    the language the model was trained on.
    """
    if isinstance(model, ToyModel):
        lang = language or model.language
        cfg = model.config
        tt = tokenize(context.text, lang)
        qset = question_token_set(question.text, lang, cfg.max_question_tokens)
        windows = []
        for ws in window_starts(len(tt.tokens), cfg.max_context_tokens, cfg.doc_stride):
            toks = tt.tokens[ws : ws + cfg.max_context_tokens]
            offs = tt.offsets[ws : ws + cfg.max_context_tokens]
            if toks:
                sp = tuple(softmax(_scores(model.w_start, toks, qset)))
                ep = tuple(softmax(_scores(model.w_end, toks, qset)))
            else:
                sp = ep = ()
            windows.append(Window(token_offsets=offs, start_probs=sp, end_probs=ep))
        return SpanDistributions(windows=tuple(windows))
    return model.predict_one(context, question, language)

"""Beam-search span decoding with summed start/end probabilities as
confidence."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Context
from .errors import ConfigError
from .reader import SpanDistributions


@dataclass(frozen=True)
class DecodeConfig:
    beam_size: int = 20
    max_answer_tokens: int = 30

    def __post_init__(self):
        if self.beam_size < 1:
            raise ConfigError("beam_size must be >= 1")
        if self.max_answer_tokens < 1:
            raise ConfigError("max_answer_tokens must be >= 1")

    def to_json_dict(self) -> dict:
        return {"beam_size": self.beam_size, "max_answer_tokens": self.max_answer_tokens}

    @staticmethod
    def from_json_dict(d: dict) -> "DecodeConfig":
        return DecodeConfig(**d)


@dataclass(frozen=True)
class SpanCandidate:
    start_token: int
    end_token: int
    char_span: tuple[int, int]
    text: str
    confidence: float


def decode(
    dists: SpanDistributions, context: Context, config: DecodeConfig
) -> list[SpanCandidate]:
    """Ranked answer candidates.

    Per window: pair the top beam_size start and end positions, drop spans
    with end before start or longer than max_answer_tokens, and score each
    by start_prob + end_prob. Identical character spans across windows keep
    their best confidence. The result is sorted by confidence descending,
    ties broken by earlier span, truncated to beam_size.
    """
    best: dict[tuple[int, int], tuple[float, int, int]] = {}
    for window in dists.windows:
        n = len(window.token_offsets)
        if n == 0:
            continue
        sp, ep = window.start_probs, window.end_probs
        top_starts = sorted(range(n), key=lambda i: (-sp[i], i))[: config.beam_size]
        top_ends = sorted(range(n), key=lambda i: (-ep[i], i))[: config.beam_size]
        for s in top_starts:
            for e in top_ends:
                if e < s or e - s + 1 > config.max_answer_tokens:
                    continue
                conf = sp[s] + ep[e]
                key = (window.token_offsets[s][0], window.token_offsets[e][1])
                prev = best.get(key)
                if prev is None or conf > prev[0]:
                    best[key] = (conf, s, e)
    ranked = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0][0], kv[0][1]))
    out = []
    for (cs, ce), (conf, s, e) in ranked[: config.beam_size]:
        out.append(
            SpanCandidate(
                start_token=s,
                end_token=e,
                char_span=(cs, ce),
                text=context.text[cs:ce],
                confidence=conf,
            )
        )
    return out


def best_answer(candidates: list[SpanCandidate]) -> SpanCandidate | None:
    return candidates[0] if candidates else None

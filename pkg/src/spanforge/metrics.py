"""Exact match and token-overlap F1 with multilingual normalization."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping

from .corpus import Dataset
from .errors import ContractError
from .text import answer_tokens, normalize_answer


def exact_match(prediction: str, golds: list[str], language: str) -> float:
    """1.0 iff the normalized prediction equals any normalized gold."""
    if not golds:
        raise ContractError("exact_match requires at least one gold answer")
    pred = normalize_answer(prediction, language)
    for g in golds:
        if pred == normalize_answer(g, language):
            return 1.0
    return 0.0


def f1_score(prediction: str, golds: list[str], language: str) -> float:
    """Max over golds of the token-multiset F1 (character tokens for zh/ko)."""
    if not golds:
        raise ContractError("f1_score requires at least one gold answer")
    pred_tokens = answer_tokens(normalize_answer(prediction, language), language)
    best = 0.0
    for g in golds:
        gold_tokens = answer_tokens(normalize_answer(g, language), language)
        if not pred_tokens and not gold_tokens:
            score = 1.0
        elif not pred_tokens or not gold_tokens:
            score = 0.0
        else:
            common = Counter(pred_tokens) & Counter(gold_tokens)
            num_same = sum(common.values())
            if num_same == 0:
                score = 0.0
            else:
                precision = num_same / len(pred_tokens)
                recall = num_same / len(gold_tokens)
                score = 2 * precision * recall / (precision + recall)
        if score > best:
            best = score
    return best


@dataclass(frozen=True)
class EvalReport:
    em: float  # percentage
    f1: float  # percentage
    n: int
    per_question: dict[str, tuple[float, float]]  # qid -> (em, f1) in [0, 1]

    def to_json_dict(self) -> dict:
        return {
            "em": self.em,
            "f1": self.f1,
            "n": self.n,
            "per_question": {
                qid: {"em": em, "f1": f1}
                for qid, (em, f1) in sorted(self.per_question.items())
            },
        }

    @staticmethod
    def from_json_dict(d: dict) -> "EvalReport":
        per = {qid: (v["em"], v["f1"]) for qid, v in d["per_question"].items()}
        return EvalReport(em=d["em"], f1=d["f1"], n=d["n"], per_question=per)


def evaluate(predictions: Mapping[str, str], gold: Dataset) -> EvalReport:
    """Dataset-level EM/F1. Questions without a prediction score 0."""
    if not gold.labeled:
        raise ContractError("evaluate requires a fully labeled gold dataset")
    per: dict[str, tuple[float, float]] = {}
    for q in gold.questions:
        texts = [a.text for a in gold.golds(q.id)]
        pred = predictions.get(q.id)
        if pred is None:
            per[q.id] = (0.0, 0.0)
        else:
            per[q.id] = (
                exact_match(pred, texts, gold.language),
                f1_score(pred, texts, gold.language),
            )
    n = len(per)
    if n == 0:
        return EvalReport(em=0.0, f1=0.0, n=0, per_question={})
    em = 100.0 * sum(v[0] for v in per.values()) / n
    f1 = 100.0 * sum(v[1] for v in per.values()) / n
    return EvalReport(em=em, f1=f1, n=n, per_question=per)

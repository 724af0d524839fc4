"""Pseudo-label generation: predict, decode, and keep the most confident
answer per question when it clears the threshold."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import AnswerSpan, Dataset, save_squad_json
from .decoder import DecodeConfig, best_answer, decode
from .errors import ContractError, TransportError, LabelingAborted
from .reader import predict


@dataclass(frozen=True)
class PseudoLabel:
    question_id: str
    answer: AnswerSpan
    confidence: float


@dataclass
class PseudoDataset:
    base: Dataset
    labels: list[PseudoLabel]
    theta: float
    iteration: int = 0

    def to_dataset(self) -> Dataset:
        """Labeled dataset over the labeled subset; training input."""
        labeled_ids = {lab.question_id for lab in self.labels}
        questions = [q for q in self.base.questions if q.id in labeled_ids]
        used_ctx = {q.context_id for q in questions}
        contexts = [c for c in self.base.contexts if c.id in used_ctx]
        answers = {lab.question_id: [lab.answer] for lab in self.labels}
        return Dataset(contexts, questions, answers, language=self.base.language)

    def sidecar_dict(self) -> dict:
        return {
            "theta": self.theta,
            "iteration": self.iteration,
            "counts": {
                "labeled": len(self.labels),
                "skipped": len(self.base.questions) - len(self.labels),
            },
            "confidences": {lab.question_id: lab.confidence for lab in self.labels},
        }

    def save(self, dataset_path, sidecar_path) -> None:
        save_squad_json(self.to_dataset(), dataset_path)
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            json.dump(self.sidecar_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")


def label(
    model,
    d_t: Dataset,
    theta: float,
    decode_cfg: DecodeConfig,
    iteration: int = 0,
    jobs: int = 1,
) -> PseudoDataset:
    """One pseudo-label per question whose top confidence is >= theta.

    Gold answers on d_t, if any, are ignored. Questions with no valid
    candidate are skipped silently but show up in the sidecar counts.
    """
    if theta < 0:
        raise ContractError("theta must be >= 0")

    def _one(question) -> PseudoLabel | None:
        ctx = d_t.context_of(question)
        cands = decode(
            predict(model, ctx, question, d_t.language), ctx, decode_cfg
        )
        top = best_answer(cands)
        if top is None or top.confidence < theta:
            return None
        return PseudoLabel(
            question_id=question.id,
            answer=AnswerSpan(text=top.text, char_start=top.char_span[0]),
            confidence=top.confidence,
        )

    labels: list[PseudoLabel] = []
    done = 0
    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for result in pool.map(_one, d_t.questions):
                    done += 1
                    if result is not None:
                        labels.append(result)
        else:
            for q in d_t.questions:
                result = _one(q)
                done += 1
                if result is not None:
                    labels.append(result)
    except TransportError as exc:
        raise LabelingAborted(
            f"reader transport failed after {done} of {len(d_t.questions)} questions",
            progress={
                "processed": done,
                "total": len(d_t.questions),
                "labeled": len(labels),
            },
        ) from exc
    labels.sort(key=lambda lab: lab.question_id)
    return PseudoDataset(base=d_t, labels=labels, theta=theta, iteration=iteration)

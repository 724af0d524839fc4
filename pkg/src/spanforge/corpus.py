"""Data model and SQuAD v1.1 JSON I/O for labeled and unlabeled corpora."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DatasetValidationError, FormatError, MissingLabelError


@dataclass(frozen=True)
class Context:
    id: str
    text: str
    title: str | None = None


@dataclass(frozen=True)
class Question:
    id: str
    context_id: str
    text: str


@dataclass(frozen=True)
class AnswerSpan:
    text: str
    char_start: int


class Dataset:
    """Immutable reading-comprehension corpus, labeled or unlabeled.

    Construction validates every invariant: unique ids, resolvable context
    references, and answer spans that exactly match their context slice.
    """

    def __init__(
        self,
        contexts: list[Context] | tuple[Context, ...],
        questions: list[Question] | tuple[Question, ...],
        answers: dict[str, list[AnswerSpan]] | None = None,
        language: str = "en",
    ):
        self.contexts = tuple(contexts)
        self.questions = tuple(questions)
        self.language = language
        self._context_by_id: dict[str, Context] = {}
        for c in self.contexts:
            if not c.text:
                raise DatasetValidationError(f"context {c.id!r} has empty text")
            if c.id in self._context_by_id:
                raise DatasetValidationError(f"duplicate context id {c.id!r}")
            self._context_by_id[c.id] = c
        self._question_by_id: dict[str, Question] = {}
        for q in self.questions:
            if q.id in self._question_by_id:
                raise DatasetValidationError(f"duplicate question id {q.id!r}")
            if q.context_id not in self._context_by_id:
                raise DatasetValidationError(
                    f"question {q.id!r} references unknown context {q.context_id!r}"
                )
            self._question_by_id[q.id] = q
        norm: dict[str, tuple[AnswerSpan, ...]] = {}
        for qid, spans in (answers or {}).items():
            q = self._question_by_id.get(qid)
            if q is None:
                raise DatasetValidationError(f"answers for unknown question {qid!r}")
            ctx = self._context_by_id[q.context_id]
            for span in spans:
                _check_span(span, ctx, qid)
            norm[qid] = tuple(spans)
        self.answers: dict[str, tuple[AnswerSpan, ...]] = norm

    @property
    def labeled(self) -> bool:
        return all(self.answers.get(q.id) for q in self.questions)

    def context_by_id(self, context_id: str) -> Context:
        return self._context_by_id[context_id]

    def question_by_id(self, question_id: str) -> Question:
        return self._question_by_id[question_id]

    def context_of(self, question: Question) -> Context:
        return self._context_by_id[question.context_id]

    def golds(self, question_id: str) -> tuple[AnswerSpan, ...]:
        return self.answers.get(question_id, ())

    def __len__(self) -> int:
        return len(self.questions)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.language == other.language
            and self.contexts == other.contexts
            and self.questions == other.questions
            and self.answers == other.answers
        )

    def __repr__(self) -> str:
        kind = "labeled" if self.labeled else "unlabeled"
        return (
            f"Dataset({len(self.contexts)} contexts, {len(self.questions)} "
            f"questions, {kind}, language={self.language!r})"
        )


def _check_span(span: AnswerSpan, ctx: Context, qid: str) -> None:
    if not span.text:
        raise DatasetValidationError(f"question {qid!r}: empty answer text")
    lo, hi = span.char_start, span.char_start + len(span.text)
    if lo < 0 or hi > len(ctx.text) or ctx.text[lo:hi] != span.text:
        raise DatasetValidationError(
            f"question {qid!r}: answer text does not match context slice at "
            f"offset {span.char_start}"
        )


_TOP_KEYS = {"data", "version"}
_ARTICLE_KEYS = {"title", "paragraphs"}
_PARAGRAPH_KEYS = {"context", "qas"}
_QA_KEYS = {"id", "question", "answers"}
_ANSWER_KEYS = {"text", "answer_start"}


def _reject_extra(obj: dict, allowed: set, path: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise FormatError(f"{path}: unexpected key(s) {sorted(extra)}")


def _need(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise FormatError(f"{path}: missing key {key!r}")
    value = obj[key]
    if not isinstance(value, types):
        raise FormatError(f"{path}.{key}: wrong type {type(value).__name__}")
    return value


def load_squad_json(path, expect_labels: bool, language: str = "en") -> Dataset:
    """Load a SQuAD v1.1 file. Context ids are assigned positionally.

    With expect_labels=True every question must carry at least one answer;
    otherwise answers may be absent or empty and the dataset is unlabeled.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            root = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(root, dict):
        raise FormatError(f"{path}: top level must be an object")
    _reject_extra(root, _TOP_KEYS, "$")
    data = _need(root, "data", list, "$")
    contexts: list[Context] = []
    questions: list[Question] = []
    answers: dict[str, list[AnswerSpan]] = {}
    ctx_index = 0
    for ai, article in enumerate(data):
        apath = f"$.data[{ai}]"
        if not isinstance(article, dict):
            raise FormatError(f"{apath}: article must be an object")
        _reject_extra(article, _ARTICLE_KEYS, apath)
        title = article.get("title")
        if title is not None and not isinstance(title, str):
            raise FormatError(f"{apath}.title: wrong type")
        paragraphs = _need(article, "paragraphs", list, apath)
        for pi, para in enumerate(paragraphs):
            ppath = f"{apath}.paragraphs[{pi}]"
            if not isinstance(para, dict):
                raise FormatError(f"{ppath}: paragraph must be an object")
            _reject_extra(para, _PARAGRAPH_KEYS, ppath)
            ctx_text = _need(para, "context", str, ppath)
            ctx = Context(id=f"c{ctx_index}", text=ctx_text, title=title)
            ctx_index += 1
            contexts.append(ctx)
            qas = _need(para, "qas", list, ppath)
            for qi, qa in enumerate(qas):
                qpath = f"{ppath}.qas[{qi}]"
                if not isinstance(qa, dict):
                    raise FormatError(f"{qpath}: qa must be an object")
                _reject_extra(qa, _QA_KEYS, qpath)
                qid = _need(qa, "id", str, qpath)
                qtext = _need(qa, "question", str, qpath)
                questions.append(Question(id=qid, context_id=ctx.id, text=qtext))
                raw_answers = qa.get("answers", [])
                if not isinstance(raw_answers, list):
                    raise FormatError(f"{qpath}.answers: wrong type")
                spans = []
                for xi, ans in enumerate(raw_answers):
                    xpath = f"{qpath}.answers[{xi}]"
                    if not isinstance(ans, dict):
                        raise FormatError(f"{xpath}: answer must be an object")
                    _reject_extra(ans, _ANSWER_KEYS, xpath)
                    atext = _need(ans, "text", str, xpath)
                    astart = _need(ans, "answer_start", int, xpath)
                    spans.append(AnswerSpan(text=atext, char_start=astart))
                if spans:
                    answers[qid] = spans
                elif expect_labels:
                    raise MissingLabelError(
                        f"question {qid!r} has no answers but labels were expected"
                    )
    return Dataset(contexts, questions, answers, language=language)


def save_squad_json(dataset: Dataset, path) -> None:
    """Persist as SQuAD v1.1 JSON; unlabeled questions get empty answers."""
    questions_by_ctx: dict[str, list[Question]] = {c.id: [] for c in dataset.contexts}
    for q in dataset.questions:
        questions_by_ctx[q.context_id].append(q)
    articles: list[dict] = []
    by_title: dict[str, dict] = {}
    for ctx in dataset.contexts:
        title = ctx.title or ""
        article = by_title.get(title)
        if article is None:
            article = {"title": title, "paragraphs": []}
            by_title[title] = article
            articles.append(article)
        qas = []
        for q in questions_by_ctx[ctx.id]:
            qas.append(
                {
                    "id": q.id,
                    "question": q.text,
                    "answers": [
                        {"text": a.text, "answer_start": a.char_start}
                        for a in dataset.golds(q.id)
                    ],
                }
            )
        article["paragraphs"].append({"context": ctx.text, "qas": qas})
    payload = {"version": "1.1", "data": articles}
    out = Path(path)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=1)
        fh.write("\n")

"""Question/answer type classification, per-type improvement breakdowns, and
the confidence-threshold sweep.

Question keyword tables ship as an editable JSON data file so users can
substitute their own sets per language.
"""

from __future__ import annotations

import csv
import json
import re
import warnings
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Protocol

from .corpus import Dataset, load_squad_json
from .errors import ContractError
from .metrics import EvalReport
from .selftrain import RunArtifacts, RunConfig, self_train
from .text import tokenize

QUESTION_TYPE_OTHER = "Other"

EN_FR_ANSWER_TYPES = (
    "Date",
    "Other Numeric",
    "Person",
    "Location",
    "Other Entity",
    "Common Noun Phrase",
    "Verb Phrase",
    "Adjective Phrase",
    "Clause",
    "Other",
)
ZH_ANSWER_TYPES = ("Numeric", "Entity", "Description")

_KEYWORDS_CACHE: dict | None = None


def _keyword_tables() -> dict:
    global _KEYWORDS_CACHE
    if _KEYWORDS_CACHE is None:
        raw = (
            resources.files("spanforge")
            .joinpath("data/question_keywords.json")
            .read_text(encoding="utf-8")
        )
        _KEYWORDS_CACHE = json.loads(raw)
    return _KEYWORDS_CACHE


def question_type_labels(language: str) -> list[str]:
    table = _keyword_tables().get(language)
    if table is None:
        return [QUESTION_TYPE_OTHER]
    return [t["label"] for t in table["types"]] + [QUESTION_TYPE_OTHER]


def classify_question(question, language: str) -> str:
    """Keyword-rule question type; always total, unmatched becomes Other."""
    table = _keyword_tables().get(language)
    if table is None:
        return QUESTION_TYPE_OTHER
    text = question.text if hasattr(question, "text") else str(question)
    if table["mode"] == "substring":
        for entry in table["types"]:
            for kw in entry["keywords"]:
                if kw in text:
                    return entry["label"]
        return QUESTION_TYPE_OTHER
    tokens = [t.lower() for t in tokenize(text, language).tokens]
    if table["mode"] == "leading":
        window = [t for t in tokens if any(c.isalnum() for c in t)][: table["window"]]
        for tok in window:
            for entry in table["types"]:
                for kw in entry["keywords"]:
                    if tok == kw or (kw.endswith("'") and tok.startswith(kw)):
                        return entry["label"]
        return QUESTION_TYPE_OTHER
    token_set = set(tokens)
    for entry in table["types"]:
        if any(kw in token_set for kw in entry["keywords"]):
            return entry["label"]
    return QUESTION_TYPE_OTHER


class AnswerTagger(Protocol):
    """External NER/POS tagger hook; tag() returns e.g.
    {"ner": "PERSON", "pos": "NNP"} with None for unknown fields."""

    def tag(self, text: str) -> dict:  # pragma: no cover - interface only
        ...


_NER_TO_TYPE = {
    "PERSON": "Person",
    "PER": "Person",
    "LOCATION": "Location",
    "LOC": "Location",
    "GPE": "Location",
    "DATE": "Date",
    "TIME": "Date",
    "CARDINAL": "Other Numeric",
    "NUMBER": "Other Numeric",
    "ORDINAL": "Other Numeric",
    "PERCENT": "Other Numeric",
    "MONEY": "Other Numeric",
    "QUANTITY": "Other Numeric",
    "ORGANIZATION": "Other Entity",
    "ORG": "Other Entity",
    "EVENT": "Other Entity",
    "WORK_OF_ART": "Other Entity",
    "FAC": "Other Entity",
    "NORP": "Other Entity",
    "MISC": "Other Entity",
}

_ZH_TYPE_MAP = {
    "Date": "Numeric",
    "Other Numeric": "Numeric",
    "Person": "Entity",
    "Location": "Entity",
    "Other Entity": "Entity",
}

_YEAR_RE = re.compile(r"\b1\d{3}\b|\b20\d{2}\b")
_EN_MONTHS = (
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
)
_FR_MONTHS = (
    "janvier", "février", "mars", "avril", "mai", "juin", "juillet",
    "août", "septembre", "octobre", "novembre", "décembre",
)
_NUM_WORDS_EN = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "twenty", "thirty", "forty", "fifty",
    "sixty", "seventy", "eighty", "ninety", "hundred", "thousand", "million",
    "billion",
}
_NUM_WORDS_FR = {
    "zéro", "un", "une", "deux", "trois", "quatre", "cinq", "six", "sept",
    "huit", "neuf", "dix", "onze", "douze", "vingt", "vingts", "trente",
    "quarante", "cinquante", "soixante", "cent", "cents", "mille", "million",
    "millions", "milliard", "milliards",
}
_CJK_NUMERALS = set("〇零一二三四五六七八九十百千萬万億亿兩两第")
_CJK_DATE_MARKERS = set("年月日")


def _looks_like_date(text: str, language: str) -> bool:
    low = text.lower()
    if language == "zh":
        has_marker = any(c in _CJK_DATE_MARKERS for c in text)
        has_number = any(c.isdigit() or c in _CJK_NUMERALS for c in text)
        return has_marker and has_number
    if _YEAR_RE.search(low):
        return True
    months = _FR_MONTHS if language == "fr" else _EN_MONTHS
    words = set(re.split(r"\W+", low))
    return any(m in words for m in months)


def _looks_numeric(text: str, language: str) -> bool:
    stripped = [c for c in text if c.isalnum() or c in _CJK_NUMERALS]
    if not stripped:
        return False
    if all(c.isdigit() for c in stripped):
        return True
    if language == "zh":
        return all(c.isdigit() or c in _CJK_NUMERALS for c in stripped)
    words = [w for w in re.split(r"\W+", text.lower()) if w]
    num_words = _NUM_WORDS_FR if language == "fr" else _NUM_WORDS_EN
    return bool(words) and all(w in num_words or w.isdigit() for w in words)


def _to_language_set(label: str, language: str) -> str:
    if language == "zh":
        return _ZH_TYPE_MAP.get(label, "Description")
    return label


def _fallback_answer_type(answer: str, language: str) -> str:
    if _looks_like_date(answer, language):
        return _to_language_set("Date", language)
    if _looks_numeric(answer, language):
        return _to_language_set("Other Numeric", language)
    # Person/Location need real NER; the fallback deliberately under-claims.
    return "Description" if language == "zh" else "Other"


def classify_answer(answer: str, language: str, tagger: AnswerTagger | None = None) -> str:
    """Answer category from an external tagger, or the rule fallback."""
    if tagger is not None:
        try:
            tags = tagger.tag(answer)
        except Exception as exc:
            warnings.warn(f"answer tagger failed ({exc}); using rule fallback")
            return _fallback_answer_type(answer, language)
        ner = tags.get("ner")
        if ner and ner.upper() in _NER_TO_TYPE:
            return _to_language_set(_NER_TO_TYPE[ner.upper()], language)
        pos = (tags.get("pos") or "").upper()
        label = None
        if pos.startswith("NN"):
            label = "Common Noun Phrase"
        elif pos.startswith("VB"):
            label = "Verb Phrase"
        elif pos.startswith("JJ"):
            label = "Adjective Phrase"
        elif pos in ("IN", "WDT", "WRB", "SBAR"):
            label = "Clause"
        if label is not None:
            return _to_language_set(label, language) if language == "zh" else label
    return _fallback_answer_type(answer, language)


@dataclass
class TypeStats:
    n: int
    zero_shot_f1: float | None
    iter_f1: list[float | None]
    delta_f1: float | None
    pseudo_label_count: int


@dataclass
class Breakdown:
    axis: str  # "question" or "answer"
    by_type: dict[str, TypeStats]

    def to_json_dict(self) -> dict:
        return {
            "axis": self.axis,
            "by_type": {
                label: {
                    "n": st.n,
                    "zero_shot_f1": st.zero_shot_f1,
                    "iter_f1": st.iter_f1,
                    "delta_f1": st.delta_f1,
                    "pseudo_label_count": st.pseudo_label_count,
                }
                for label, st in sorted(self.by_type.items())
            },
        }


def _mean_pct(values: list[float]) -> float | None:
    if not values:
        return None
    return 100.0 * sum(values) / len(values)


def _classify_for_axis(axis, question, answer_text, language, tagger):
    if axis == "question":
        return classify_question(question, language)
    return classify_answer(answer_text, language, tagger)


def breakdown_report(
    run: RunArtifacts,
    gold: Dataset,
    target: Dataset,
    axis: str = "question",
    tagger: AnswerTagger | None = None,
) -> Breakdown:
    """Per-type counts, zero-shot F1, per-iteration F1, delta F1 (iteration 1
    minus zero-shot) and iteration-0 pseudo-label counts."""
    if axis not in ("question", "answer"):
        raise ContractError("axis must be 'question' or 'answer'")
    if not run.iterations or any(it.eval is None for it in run.iterations):
        raise ContractError("run is missing per-question evaluation records")

    f1_by_type: dict[str, list[list[float]]] = {}
    n_iters = len(run.iterations)
    counts: dict[str, int] = {}
    for q in gold.questions:
        answer_text = gold.golds(q.id)[0].text if gold.golds(q.id) else ""
        label = _classify_for_axis(axis, q, answer_text, gold.language, tagger)
        counts[label] = counts.get(label, 0) + 1
        slot = f1_by_type.setdefault(label, [[] for _ in range(n_iters)])
        for k, it in enumerate(run.iterations):
            em_f1 = it.eval.per_question.get(q.id)
            if em_f1 is None:
                raise ContractError(f"missing per-question score for {q.id!r}")
            slot[k].append(em_f1[1])

    # iteration-0 pseudo-labels classified on the target corpus
    pseudo_counts: dict[str, int] = {}
    it0 = run.iterations[0]
    pseudo_ds = (
        load_squad_json(it0.pseudo_dataset_path(), expect_labels=False,
                        language=target.language)
        if axis == "answer"
        else None
    )
    for qid in it0.sidecar.get("confidences", {}):
        if axis == "question":
            label = classify_question(target.question_by_id(qid), target.language)
        else:
            spans = pseudo_ds.golds(qid) if pseudo_ds else ()
            label = classify_answer(
                spans[0].text if spans else "", target.language, tagger
            )
        pseudo_counts[label] = pseudo_counts.get(label, 0) + 1

    by_type: dict[str, TypeStats] = {}
    for label in sorted(set(counts) | set(pseudo_counts)):
        per_iter = f1_by_type.get(label, [[] for _ in range(n_iters)])
        means = [_mean_pct(v) for v in per_iter]
        delta = None
        if n_iters >= 2 and means[0] is not None and means[1] is not None:
            delta = means[1] - means[0]
        by_type[label] = TypeStats(
            n=counts.get(label, 0),
            zero_shot_f1=means[0] if means else None,
            iter_f1=means,
            delta_f1=delta,
            pseudo_label_count=pseudo_counts.get(label, 0),
        )
    return Breakdown(axis=axis, by_type=by_type)


def format_breakdown_table(breakdown: Breakdown) -> str:
    """Aligned-column plain-text table."""
    headers = ["Type", "n", "ZeroShotF1"]
    n_iters = max(
        (len(st.iter_f1) for st in breakdown.by_type.values()), default=0
    )
    headers += [f"Iter{k}F1" for k in range(1, n_iters)]
    headers += ["DeltaF1", "PseudoLabels"]
    rows = [headers]
    for label, st in sorted(breakdown.by_type.items()):
        fmt = lambda v: "-" if v is None else f"{v:.2f}"
        row = [label, str(st.n), fmt(st.zero_shot_f1)]
        row += [fmt(v) for v in st.iter_f1[1:]]
        row += [fmt(st.delta_f1), str(st.pseudo_label_count)]
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"


def write_scatter_csv(breakdown: Breakdown, path, x_field: str) -> None:
    """CSV rows (type, x, y) with y = delta F1; x is zero_shot_f1 or
    pseudo_label_count."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["type", x_field, "delta_f1"])
        for label, st in sorted(breakdown.by_type.items()):
            x = getattr(st, x_field)
            if x is None or st.delta_f1 is None:
                continue
            writer.writerow([label, x, st.delta_f1])


def threshold_sweep(
    m0,
    d_t: Dataset,
    gold: Dataset,
    thetas: list[float],
    run: RunConfig,
) -> dict[float, EvalReport]:
    """Self-train once per threshold from the same M0; returns the final
    evaluation per threshold and persists each sub-run under the run dir."""
    if not thetas:
        raise ContractError("thetas must be non-empty")
    if run.run_dir is None:
        raise ContractError("run.run_dir is required")
    base_dir = Path(run.run_dir)
    results: dict[float, EvalReport] = {}
    for theta in thetas:
        sub = replace(run, theta=theta, run_dir=str(base_dir / f"theta_{theta:g}"))
        _, records = self_train(m0, d_t, sub, gold)
        results[theta] = records[-1].eval
    summary = {
        "thetas": {
            f"{theta:g}": {"em": rep.em, "f1": rep.f1, "n": rep.n}
            for theta, rep in results.items()
        }
    }
    base_dir.mkdir(parents=True, exist_ok=True)
    with open(base_dir / "sweep.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    return results

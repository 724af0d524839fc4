import json
import warnings
from dataclasses import replace
from pathlib import Path

import pytest

from spanforge.analysis import (
    Breakdown,
    breakdown_report,
    classify_answer,
    classify_question,
    format_breakdown_table,
    question_type_labels,
    threshold_sweep,
    write_scatter_csv,
)
from spanforge.corpus import AnswerSpan, Context, Dataset, Question, save_squad_json
from spanforge.decoder import DecodeConfig
from spanforge.errors import ContractError
from spanforge.metrics import EvalReport
from spanforge.reader import checkpoint_bytes, new_toy_model
from spanforge.selftrain import RunConfig, load_run, self_train
from spanforge.synth import bilingual_cipher_fixture, fixture_train_config


# --- question classification -------------------------------------------------

def test_english_keyword_rules():
    assert classify_question("When did the war end?", "en") == "When"
    assert classify_question("Is this statement true?", "en") == "Other"
    assert classify_question("Who wrote it?", "en") == "Who"
    assert classify_question("In which year was it built?", "en") == "Which"
    assert classify_question("HOW does it work?", "en") == "How"


def test_english_priority_order_is_fixed():
    # documented convention: priority list order decides, not position
    assert classify_question("How many of those, and which one?", "en") == "Which"
    assert classify_question("Where and when did it happen?", "en") == "When"


def test_french_leading_interrogatives():
    assert classify_question("Combien de joueurs sont sur le terrain ?", "fr") == "HowMany"
    assert classify_question("Qui a peint ce tableau ?", "fr") == "Who"
    assert classify_question("Qu'est-ce que la vie ?", "fr") == "WhatQue"
    assert classify_question("Quand est-il né ?", "fr") == "When"
    assert classify_question("Où se trouve Paris ?", "fr") == "Where"
    assert classify_question("À quoi sert cet outil ?", "fr") == "WhatQuoi"
    assert classify_question("Pourquoi le ciel est-il bleu ?", "fr") == "Why"
    assert classify_question("Comment ça marche ?", "fr") == "How"
    assert classify_question("Il fait beau aujourd'hui.", "fr") == "Other"


def test_chinese_substring_rules_with_priority():
    assert classify_question("誰是孫中山？", "zh") == "Who"
    assert classify_question("為什麼天空是藍色的？", "zh") == "Why"  # not What
    assert classify_question("哪裡可以買到？", "zh") == "Where"  # not Which
    assert classify_question("他在哪個城市出生？", "zh") == "Which"
    assert classify_question("這是什麼時候發生的？", "zh") == "When"  # not What
    assert classify_question("如何煮飯？", "zh") == "How"
    assert classify_question("這是什麼？", "zh") == "What"
    assert classify_question("請描述一下。", "zh") == "Other"


def test_classification_total_and_deterministic():
    qs = ["When?", "what is it", "no keyword here", ""]
    for q in qs:
        a = classify_question(q, "en")
        assert a == classify_question(q, "en")
        assert a in question_type_labels("en")


def test_question_object_accepted():
    q = Question(id="q", context_id="c", text="Why not?")
    assert classify_question(q, "en") == "Why"


# --- answer classification ---------------------------------------------------

def test_answer_fallback_rules():
    assert classify_answer("1873", "en") == "Date"
    assert classify_answer("in March 1920", "en") == "Date"
    assert classify_answer("42", "en") == "Other Numeric"
    assert classify_answer("seven hundred", "en") == "Other Numeric"
    assert classify_answer("because of the storm", "en") == "Other"
    assert classify_answer("三十", "zh") == "Numeric"
    assert classify_answer("一九九八年", "zh") == "Numeric"
    assert classify_answer("孫中山先生", "zh") == "Description"
    assert classify_answer("mille neuf cents", "fr") == "Other Numeric"


class _Tagger:
    def __init__(self, ner=None, pos=None, boom=False):
        self.ner, self.pos, self.boom = ner, pos, boom

    def tag(self, text):
        if self.boom:
            raise RuntimeError("tagger offline")
        return {"ner": self.ner, "pos": self.pos}


def test_answer_tagger_mapping():
    assert classify_answer("Marie Curie", "en", _Tagger(ner="PERSON")) == "Person"
    assert classify_answer("Paris", "en", _Tagger(ner="GPE")) == "Location"
    assert classify_answer("the red one", "en", _Tagger(pos="JJ")) == "Adjective Phrase"
    assert classify_answer("ran home", "en", _Tagger(pos="VBD")) == "Verb Phrase"
    assert classify_answer("a dog", "en", _Tagger(pos="NN")) == "Common Noun Phrase"
    # zh maps through its 3-way set
    assert classify_answer("孫中山", "zh", _Tagger(ner="PERSON")) == "Entity"


def test_answer_tagger_failure_falls_back_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        got = classify_answer("1873", "en", _Tagger(boom=True))
    assert got == "Date"
    assert any("fallback" in str(w.message) for w in caught)


# --- breakdown ---------------------------------------------------------------

def _write_eval(path: Path, per_question):
    n = len(per_question)
    em = 100.0 * sum(v[0] for v in per_question.values()) / n
    f1 = 100.0 * sum(v[1] for v in per_question.values()) / n
    payload = {
        "em": em,
        "f1": f1,
        "n": n,
        "per_question": {qid: {"em": em_, "f1": f1_} for qid, (em_, f1_) in per_question.items()},
    }
    path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def _fake_run(tmp_path, gold, per_iter_scores, confidences, pseudo_answers=None):
    run_dir = tmp_path / "fakerun"
    run_dir.mkdir()
    (run_dir / "config.json").write_text(json.dumps({"theta": 0.7}), encoding="utf-8")
    for i, scores in enumerate(per_iter_scores):
        d = run_dir / f"iter_{i}"
        d.mkdir()
        _write_eval(d / "eval.json", scores)
        sidecar = {
            "theta": 0.7,
            "iteration": i,
            "counts": {"labeled": len(confidences), "skipped": 0},
            "confidences": confidences if i == 0 else {},
        }
        (d / "sidecar.json").write_text(json.dumps(sidecar), encoding="utf-8")
        labeled = {
            qid: [AnswerSpan(text=(pseudo_answers or {}).get(qid, gold.golds(qid)[0].text),
                             char_start=gold.golds(qid)[0].char_start)]
            for qid in confidences
        } if i == 0 else {}
        subset = Dataset(
            list(gold.contexts),
            [q for q in gold.questions if q.id in labeled],
            labeled or None,
            language=gold.language,
        )
        save_squad_json(subset, d / "pseudo.json")
        (d / "model.ckpt").write_bytes(b"{}")
    return load_run(run_dir)


def _when_dataset(n):
    ctx = Context(id="c0", text="It happened in 1873 exactly.")
    questions = [Question(id=f"q{i:03d}", context_id="c0", text="When did it happen?") for i in range(n)]
    answers = {q.id: [AnswerSpan(text="1873", char_start=15)] for q in questions}
    return Dataset([ctx], questions, answers)


def test_breakdown_reproduces_published_iteration_means(tmp_path):
    # per-question scores engineered so the per-iteration means equal the
    # reference series 75.63, 82.00, 83.27, 83.99
    gold = _when_dataset(100)
    qids = [q.id for q in gold.questions]

    def scores_for(mean_pct):
        ones = int(mean_pct)  # e.g. 75 questions at 1.0
        frac = round(mean_pct - ones, 2)
        per = {}
        for i, qid in enumerate(qids):
            if i < ones:
                per[qid] = (1.0, 1.0)
            elif i == ones and frac > 0:
                per[qid] = (0.0, frac)
            else:
                per[qid] = (0.0, 0.0)
        return per

    series = [75.63, 82.00, 83.27, 83.99]
    run = _fake_run(
        tmp_path,
        gold,
        [scores_for(v) for v in series],
        confidences={qid: 1.0 for qid in qids[:40]},
    )
    breakdown = breakdown_report(run, gold, gold, axis="question")
    assert set(breakdown.by_type) == {"When"}
    stats = breakdown.by_type["When"]
    assert stats.n == 100
    for got, want in zip(stats.iter_f1, series):
        assert got == pytest.approx(want, abs=1e-9)
    assert stats.zero_shot_f1 == pytest.approx(75.63, abs=1e-9)
    assert stats.delta_f1 == pytest.approx(82.00 - 75.63, abs=1e-9)
    assert stats.pseudo_label_count == 40
    table = format_breakdown_table(breakdown)
    assert "75.63" in table and "82.00" in table


def test_breakdown_single_type_row_counts(tmp_path):
    gold = _when_dataset(6)
    per = {q.id: (1.0, 1.0) for q in gold.questions}
    run = _fake_run(tmp_path, gold, [per, per], confidences={})
    breakdown = breakdown_report(run, gold, gold, axis="question")
    assert list(breakdown.by_type) == ["When"]
    assert breakdown.by_type["When"].n == len(gold.questions)


def test_breakdown_two_types_hand_computed_delta(tmp_path):
    ctx = Context(id="c0", text="Alpha beta 1873 gamma.")
    questions = [
        Question(id="q0", context_id="c0", text="When was it?"),
        Question(id="q1", context_id="c0", text="When did it end?"),
        Question(id="q2", context_id="c0", text="Who was there?"),
        Question(id="q3", context_id="c0", text="Who left?"),
        Question(id="q4", context_id="c0", text="Who stayed?"),
        Question(id="q5", context_id="c0", text="When was that?"),
    ]
    answers = {q.id: [AnswerSpan(text="1873", char_start=11)] for q in questions}
    gold = Dataset([ctx], questions, answers)
    iter0 = {"q0": (0, 0.2), "q1": (0, 0.4), "q5": (0, 0.6),   # When mean 0.4
             "q2": (0, 0.5), "q3": (0, 0.5), "q4": (0, 0.5)}   # Who mean 0.5
    iter1 = {"q0": (0, 0.8), "q1": (0, 0.8), "q5": (0, 0.8),   # When mean 0.8
             "q2": (0, 0.4), "q3": (0, 0.6), "q4": (0, 0.5)}   # Who mean 0.5
    run = _fake_run(tmp_path, gold, [iter0, iter1], confidences={"q0": 1.0, "q2": 0.9})
    breakdown = breakdown_report(run, gold, gold, axis="question")
    assert breakdown.by_type["When"].delta_f1 == pytest.approx(40.0, abs=1e-9)
    assert breakdown.by_type["Who"].delta_f1 == pytest.approx(0.0, abs=1e-9)
    assert breakdown.by_type["When"].pseudo_label_count == 1
    assert breakdown.by_type["Who"].pseudo_label_count == 1
    assert sum(st.n for st in breakdown.by_type.values()) == len(gold.questions)


def test_breakdown_answer_axis(tmp_path):
    gold = _when_dataset(4)
    per = {q.id: (1.0, 1.0) for q in gold.questions}
    run = _fake_run(tmp_path, gold, [per, per], confidences={"q000": 1.0})
    breakdown = breakdown_report(run, gold, gold, axis="answer")
    assert set(breakdown.by_type) == {"Date"}
    assert breakdown.by_type["Date"].n == 4
    assert breakdown.by_type["Date"].pseudo_label_count == 1


def test_breakdown_requires_eval_records(tmp_path):
    gold = _when_dataset(2)
    run = _fake_run(tmp_path, gold, [{q.id: (0, 0) for q in gold.questions}], confidences={})
    run.iterations[0].eval = None
    with pytest.raises(ContractError):
        breakdown_report(run, gold, gold)


def test_scatter_csv(tmp_path):
    gold = _when_dataset(3)
    per0 = {q.id: (0.0, 0.5) for q in gold.questions}
    per1 = {q.id: (0.0, 0.9) for q in gold.questions}
    run = _fake_run(tmp_path, gold, [per0, per1], confidences={})
    breakdown = breakdown_report(run, gold, gold)
    out = tmp_path / "scatter.csv"
    write_scatter_csv(breakdown, out, "zero_shot_f1")
    rows = out.read_text(encoding="utf-8").strip().splitlines()
    assert rows[0] == "type,zero_shot_f1,delta_f1"
    assert rows[1].startswith("When,50.0")


# --- threshold sweep ---------------------------------------------------------

@pytest.fixture(scope="module")
def sweep_setup():
    fx = bilingual_cipher_fixture(seed=13, n_source=120, n_target=80, n_dev=50)
    cfg = fixture_train_config(seed=13)
    from spanforge.reader import train

    m0 = train(new_toy_model(cfg), fx.source, cfg)
    return fx, cfg, m0


def test_singleton_sweep_equals_plain_run(tmp_path, sweep_setup):
    fx, cfg, m0 = sweep_setup
    run = RunConfig(
        iterations=1,
        theta=0.7,
        train_config=cfg,
        decode_config=DecodeConfig(),
        run_dir=str(tmp_path / "sweep"),
        target_path="t.json",
        eval_path="d.json",
    )
    results = threshold_sweep(m0, fx.target_train, fx.target_dev, [0.7], run)
    assert list(results) == [0.7]
    plain = RunConfig(
        iterations=1,
        theta=0.7,
        train_config=cfg,
        decode_config=DecodeConfig(),
        run_dir=str(tmp_path / "plain"),
        target_path="t.json",
        eval_path="d.json",
    )
    _, records = self_train(m0, fx.target_train, plain, fx.target_dev)
    assert results[0.7] == records[-1].eval


def test_sweep_entry_byte_identical_to_standalone(tmp_path, sweep_setup):
    fx, cfg, m0 = sweep_setup
    run = RunConfig(
        iterations=1,
        theta=0.5,
        train_config=cfg,
        decode_config=DecodeConfig(),
        run_dir=str(tmp_path / "sw"),
        target_path="t.json",
        eval_path="d.json",
    )
    threshold_sweep(m0, fx.target_train, fx.target_dev, [0.5, 0.7], run)
    standalone = replace(run, theta=0.7, run_dir=str(tmp_path / "alone"))
    self_train(m0, fx.target_train, standalone, fx.target_dev)
    sweep_dir = Path(run.run_dir) / "theta_0.7"
    alone_dir = Path(standalone.run_dir)
    sweep_files = sorted(p.relative_to(sweep_dir) for p in sweep_dir.rglob("*") if p.is_file())
    alone_files = sorted(p.relative_to(alone_dir) for p in alone_dir.rglob("*") if p.is_file())
    assert sweep_files == alone_files
    for rel in sweep_files:
        assert (sweep_dir / rel).read_bytes() == (alone_dir / rel).read_bytes(), rel


def test_sweep_theta_zero_trains_on_everything(tmp_path, sweep_setup):
    fx, cfg, m0 = sweep_setup
    run = RunConfig(
        iterations=1,
        theta=0.0,
        train_config=cfg,
        decode_config=DecodeConfig(),
        run_dir=str(tmp_path / "z"),
    )
    threshold_sweep(m0, fx.target_train, fx.target_dev, [0.0], run)
    sidecar = json.loads(
        (Path(run.run_dir) / "theta_0" / "iter_0" / "sidecar.json").read_text(encoding="utf-8")
    )
    assert sidecar["counts"]["labeled"] == len(fx.target_train.questions)


def test_sweep_requires_thetas(tmp_path, sweep_setup):
    fx, cfg, m0 = sweep_setup
    run = RunConfig(train_config=cfg, decode_config=DecodeConfig(), run_dir=str(tmp_path / "x"))
    with pytest.raises(ContractError):
        threshold_sweep(m0, fx.target_train, fx.target_dev, [], run)

"""Generate the cross-implementation conformance fixtures for the reference
adapter: a request/response transcript recorded from the in-process reader,
plus unit-level fixtures (float formatting, portable exp, shuffle order,
tokenizer output) that pin the shared arithmetic bit for bit."""

import json
import random
import struct
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from spanforge.corpus import save_squad_json
from spanforge.numerics import (
    SplitMix64,
    canonical_json,
    format_float,
    portable_exp,
    sha256_hex,
)
from spanforge.reader import (
    TrainConfig,
    checkpoint_bytes,
    new_toy_model,
    predict,
    train,
)
from spanforge.synth import CueCorpusSpec, generate_cue_corpus, make_vocab
from spanforge.text import tokenize
from spanforge.corpus import AnswerSpan, Context, Dataset, Question

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("adapter/fixtures")


def _distributions_payload(dists):
    windows = []
    for w in dists.windows:
        windows.append(
            {
                "token_offsets": [[s, e] for s, e in w.token_offsets],
                "start_probs": list(w.start_probs),
                "end_probs": list(w.end_probs),
            }
        )
    return {"windows": windows}


def _zh_dataset():
    contexts = [
        Context(id="zc0", text="北京大学成立于一八九八年，位于北京市。"),
        Context(id="zc1", text="长江是亚洲最长的河流。"),
    ]
    questions = [
        Question(id="zq0", context_id="zc0", text="北京大学何时成立？"),
        Question(id="zq1", context_id="zc1", text="亚洲最长的河流是什么？"),
    ]
    answers = {
        "zq0": [AnswerSpan(text="一八九八年", char_start=7)],
        "zq1": [AnswerSpan(text="长江", char_start=0)],
    }
    return Dataset(contexts, questions, answers, language="zh")


def build_transcript(out_dir: Path) -> list[dict]:
    records = []

    def exchange(request_obj, response_obj):
        records.append(
            {"request": canonical_json(request_obj), "response": canonical_json(response_obj)}
        )

    # --- English synthetic fixture with windowing exercised ---
    vocab = make_vocab(150, 31)
    en_data = generate_cue_corpus(
        CueCorpusSpec(
            n_questions=60,
            seed=77,
            vocab=vocab,
            cue_pairs=[("zorp", "blik"), ("quin", "marv")],
            context_len=(20, 60),
        )
    )
    save_squad_json(en_data, out_dir / "train_en.json")
    cfg_en = TrainConfig(
        epochs=2,
        learning_rate=0.008,
        seed=42,
        max_context_tokens=48,
        doc_stride=16,
        max_question_tokens=8,
    )
    m_en = train(new_toy_model(cfg_en, "en"), en_data, cfg_en)
    id_en = "sha256:" + sha256_hex(checkpoint_bytes(m_en))
    cfg_en_wire = cfg_en.to_json_dict()
    cfg_en_wire["language"] = "en"
    exchange(
        {"op": "train", "dataset_path": "fixtures/train_en.json", "config": cfg_en_wire},
        {"ok": True, "model_id": id_en},
    )

    items = []
    expected = []
    picks = [en_data.questions[0], en_data.questions[7], en_data.questions[23]]
    for q in picks:
        ctx = en_data.context_of(q)
        items.append({"context": ctx.text, "question": q.text, "language": "en"})
        expected.append(_distributions_payload(predict(m_en, ctx, q, "en")))
    exchange(
        {"op": "predict", "model_id": id_en, "items": items},
        {"ok": True, "results": expected},
    )

    # --- Chinese fixture: code-point tokenization ---
    zh_data = _zh_dataset()
    save_squad_json(zh_data, out_dir / "train_zh.json")
    cfg_zh = TrainConfig(epochs=3, learning_rate=0.05, seed=7)
    m_zh = train(new_toy_model(cfg_zh, "zh"), zh_data, cfg_zh)
    id_zh = "sha256:" + sha256_hex(checkpoint_bytes(m_zh))
    cfg_zh_wire = cfg_zh.to_json_dict()
    cfg_zh_wire["language"] = "zh"
    exchange(
        {"op": "train", "dataset_path": "fixtures/train_zh.json", "config": cfg_zh_wire},
        {"ok": True, "model_id": id_zh},
    )
    zh_items = []
    zh_expected = []
    for q in zh_data.questions:
        ctx = zh_data.context_of(q)
        zh_items.append({"context": ctx.text, "question": q.text, "language": "zh"})
        zh_expected.append(_distributions_payload(predict(m_zh, ctx, q, "zh")))
    exchange(
        {"op": "predict", "model_id": id_zh, "items": zh_items},
        {"ok": True, "results": zh_expected},
    )

    # --- protocol edge cases ---
    exchange(
        {"op": "predict", "model_id": id_en, "items": []},
        {"ok": True, "results": []},
    )
    exchange(
        {"op": "predict", "model_id": "nope", "items": []},
        {"ok": False, "error": "unknown model_id: nope"},
    )
    records.append(
        {
            "request": "this is not json",
            "response": canonical_json({"ok": False, "error": "invalid request JSON"}),
        }
    )
    exchange({"op": "frobnicate"}, {"ok": False, "error": "unsupported op"})
    exchange(
        {"op": "train", "dataset_path": "fixtures/missing.json", "config": cfg_en_wire},
        {"ok": False, "error": "cannot read dataset"},
    )
    return records


def build_float_cases():
    rng = random.Random(8)
    cases = []
    specials = [0.0, -0.0, 1.0, -1.0, 0.7, 5e-324, 1.7976931348623157e308, 0.1,
                1125899906842624.25, 2.2250738585072014e-308]
    values = specials[:]
    while len(values) < 300:
        bits = rng.getrandbits(64)
        x = struct.unpack("<d", struct.pack("<Q", bits))[0]
        if x != x or x in (float("inf"), float("-inf")):
            continue
        values.append(x)
    for x in values:
        bits = struct.unpack("<Q", struct.pack("<d", x))[0]
        cases.append({"bits": f"{bits:016x}", "text": format_float(x)})
    return cases


def build_exp_cases():
    rng = random.Random(9)
    xs = [0.0, 1.0, -1.0, 709.0, -745.0, -745.2, 710.0, 0.5, -0.5, 1e-300, -650.25]
    xs += [rng.uniform(-745, 710) for _ in range(300)]
    cases = []
    for x in xs:
        y = portable_exp(x)
        xb = struct.unpack("<Q", struct.pack("<d", x))[0]
        yb = struct.unpack("<Q", struct.pack("<d", y))[0]
        cases.append({"x_bits": f"{xb:016x}", "y_bits": f"{yb:016x}"})
    return cases


def build_shuffle_cases():
    cases = []
    for seed, n in ((42, 10), (7, 1), (123456789, 25), (0, 8), (2**63, 16)):
        xs = list(range(n))
        SplitMix64(seed).shuffle(xs)
        rng = SplitMix64(seed + 1)
        draws = [rng.next_u64() for _ in range(4)]
        cases.append({"seed": str(seed), "n": n, "permutation": xs,
                      "next_draws": [str(d) for d in draws]})
    return cases


def build_tokenize_cases():
    texts = [
        ("the cat sat", "en"),
        ("Hello, world", "en"),
        ('("don\'t")', "en"),
        ("  spaced\tout   here ", "en"),
        ("北京大学成立于1898年。", "zh"),
        ("北 京", "zh"),
        ("서울은 한국의 수도이다.", "ko"),
        ("a \U0001F600 b", "en"),
        ("", "en"),
        ("l'eau est «froide»", "fr"),
    ]
    cases = []
    for text, lang in texts:
        tt = tokenize(text, lang)
        cases.append(
            {
                "text": text,
                "language": lang,
                "tokens": list(tt.tokens),
                "offsets": [[s, e] for s, e in tt.offsets],
            }
        )
    return cases


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    transcript = build_transcript(OUT)
    with open(OUT / "transcript.jsonl", "w", encoding="utf-8") as fh:
        for rec in transcript:
            fh.write(json.dumps(rec, ensure_ascii=True) + "\n")
    (OUT / "float_cases.json").write_text(json.dumps(build_float_cases(), indent=0) + "\n")
    (OUT / "exp_cases.json").write_text(json.dumps(build_exp_cases(), indent=0) + "\n")
    (OUT / "shuffle_cases.json").write_text(json.dumps(build_shuffle_cases(), indent=1) + "\n")
    (OUT / "tokenize_cases.json").write_text(
        json.dumps(build_tokenize_cases(), ensure_ascii=False, indent=1) + "\n"
    )
    print(f"wrote fixtures into {OUT} ({len(transcript)} transcript exchanges)")


if __name__ == "__main__":
    main()

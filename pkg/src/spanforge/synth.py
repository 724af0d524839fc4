"""Synthetic corpus generators for desk-scale runs and tests.

The cue corpus: each context is a word sequence with a cue/mark pair around
a single answer token ("... cue ANSWER mark ..."), and the question names
the pair plus a few filler words, so a windowed-overlap reader can locate
the answer. Noisy variants plant a second, earlier fake cue/mark sandwich
whose center is only distinguishable from the real answer by its position
in the context.

The bilingual fixture ciphers the vocabulary (a fixed share kept identical)
and shifts the answer-position distribution between source and target, so
zero-shot transfer is imperfect while confident predictions stay mostly
correct; self-training then has observable room to improve.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .corpus import AnswerSpan, Context, Dataset, Question, save_squad_json
from .numerics import SplitMix64

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def make_vocab(size: int, seed: int, prefix: str = "") -> list[str]:
    rng = SplitMix64(seed)
    words: list[str] = []
    seen = set()
    while len(words) < size:
        length = 4 + rng.randbelow(4)
        w = prefix + "".join(_LETTERS[rng.randbelow(26)] for _ in range(length))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


@dataclass
class CueCorpusSpec:
    n_questions: int
    seed: int
    vocab: list[str]
    cue_pairs: list[tuple[str, str]]
    language: str = "en"
    context_len: tuple[int, int] = (14, 52)
    answer_band: tuple[float, float] = (0.1, 0.9)
    fake_rate: float = 0.0  # fraction of contexts with fake sandwiches
    fake_count: int = 1  # fakes per noisy context
    fake_boost_rate: float = 0.0  # of the fakes, fraction with a filler boost
    fake_gap: int = 5  # min token distance between fake and real sandwiches
    question_fillers: int = 3
    id_prefix: str = "q"


def _band_pos(rng: SplitMix64, band: tuple[float, float], length: int) -> int:
    rel = rng.uniform(band[0], band[1])
    p = int(rel * (length - 1))
    return max(2, min(length - 3, p))


def generate_cue_corpus(spec: CueCorpusSpec) -> Dataset:
    rng = SplitMix64(spec.seed)
    contexts: list[Context] = []
    questions: list[Question] = []
    answers: dict[str, list[AnswerSpan]] = {}
    reserved = {w for pair in spec.cue_pairs for w in pair}
    pool = [w for w in spec.vocab if w not in reserved]
    lo_len, hi_len = spec.context_len
    for i in range(spec.n_questions):
        length = lo_len + rng.randbelow(hi_len - lo_len + 1)
        words = [pool[rng.randbelow(len(pool))] for _ in range(length)]
        cue, mark = spec.cue_pairs[rng.randbelow(len(spec.cue_pairs))]
        fillers = [pool[rng.randbelow(len(pool))] for _ in range(spec.question_fillers)]
        p = _band_pos(rng, spec.answer_band, length)
        words[p - 1] = cue
        words[p + 1] = mark
        if rng.uniform(0.0, 1.0) < spec.fake_rate:
            # fake sandwiches strictly earlier than the real one; a fake
            # center is distinguishable from the real answer only by
            # position, unless boosted with a question filler, which takes a
            # large positional weight to overcome
            placed: list[int] = []
            for k in range(spec.fake_count):
                lo_f, hi_f = 2, p - spec.fake_gap
                f = None
                for _ in range(40):
                    cand = lo_f + rng.randbelow(max(hi_f - lo_f + 1, 1))
                    if cand > hi_f:
                        continue
                    if all(abs(cand - other) >= spec.fake_gap for other in placed):
                        f = cand
                        break
                if f is None:
                    continue
                placed.append(f)
                words[f - 1] = cue
                words[f + 1] = mark
                if words[f] == words[p] or words[f] in reserved:
                    words[f] = pool[rng.randbelow(len(pool))]
                boosted = rng.uniform(0.0, 1.0) < spec.fake_boost_rate
                if boosted and fillers and f >= 2:
                    words[f - 2] = fillers[min(k, len(fillers) - 1)]
        text = " ".join(words)
        char_start = sum(len(w) + 1 for w in words[:p])
        ctx = Context(id=f"{spec.id_prefix}c{i}", text=text)
        qid = f"{spec.id_prefix}{i:05d}"
        contexts.append(ctx)
        q_text = " ".join([cue, mark] + fillers) + "?"
        questions.append(Question(id=qid, context_id=ctx.id, text=q_text))
        answers[qid] = [AnswerSpan(text=words[p], char_start=char_start)]
    return Dataset(contexts, questions, answers, language=spec.language)


def strip_labels(dataset: Dataset) -> Dataset:
    return Dataset(
        list(dataset.contexts), list(dataset.questions), None, language=dataset.language
    )


def cipher_mapping(vocab: list[str], seed: int, shared_fraction: float = 0.3) -> dict[str, str]:
    """Deterministic word-substitution cipher; a fixed share of words map to
    themselves, the rest to fresh words."""
    rng = SplitMix64(seed)
    n_shared = int(len(vocab) * shared_fraction)
    indices = list(range(len(vocab)))
    rng.shuffle(indices)
    shared = set(indices[:n_shared])
    fresh = make_vocab(len(vocab), seed ^ 0x5EED, prefix="x")
    mapping = {}
    for i, w in enumerate(vocab):
        mapping[w] = w if i in shared else fresh[i]
    return mapping


@dataclass
class BilingualFixture:
    source: Dataset  # labeled source-language training corpus
    target_train: Dataset  # unlabeled self-training corpus
    target_train_gold: Dataset  # same questions with answers, for analysis
    target_dev: Dataset  # labeled evaluation corpus


def bilingual_cipher_fixture(
    seed: int = 42,
    n_source: int = 500,
    n_target: int = 500,
    n_dev: int = 300,
    fake_rate: float = 0.45,
    fake_boost_rate: float = 0.0,
    shared_fraction: float = 0.3,
) -> BilingualFixture:
    """Source: answers anywhere, no fakes. Target: ciphered vocabulary, late
    answers, a share of contexts carrying an earlier fake sandwich."""
    vocab = make_vocab(240, seed * 7 + 1)
    cue_pairs = [
        ("zorp", "blik"),
        ("quin", "marv"),
        ("felt", "dusk"),
        ("grum", "pell"),
    ]
    cue_words = [w for pair in cue_pairs for w in pair]
    mapping = cipher_mapping(vocab + cue_words, seed * 7 + 2, shared_fraction)
    t_vocab = [mapping[w] for w in vocab]
    t_pairs = [(mapping[c], mapping[m]) for c, m in cue_pairs]

    source = generate_cue_corpus(
        CueCorpusSpec(
            n_questions=n_source,
            seed=seed * 7 + 3,
            vocab=vocab,
            cue_pairs=cue_pairs,
            answer_band=(0.1, 0.9),
            fake_rate=0.0,
            id_prefix="src",
        )
    )
    target_spec = CueCorpusSpec(
        n_questions=n_target,
        seed=seed * 7 + 4,
        vocab=t_vocab,
        cue_pairs=t_pairs,
        answer_band=(0.55, 0.95),
        fake_rate=fake_rate,
        fake_boost_rate=fake_boost_rate,
        id_prefix="tgt",
    )
    target_gold = generate_cue_corpus(target_spec)
    dev_spec = CueCorpusSpec(
        n_questions=n_dev,
        seed=seed * 7 + 5,
        vocab=t_vocab,
        cue_pairs=t_pairs,
        answer_band=(0.55, 0.95),
        fake_rate=fake_rate,
        fake_boost_rate=fake_boost_rate,
        id_prefix="dev",
    )
    target_dev = generate_cue_corpus(dev_spec)
    return BilingualFixture(
        source=source,
        target_train=strip_labels(target_gold),
        target_train_gold=target_gold,
        target_dev=target_dev,
    )


def fixture_train_config(seed: int = 42):
    """Training settings matched to the fixture scale (pinned by the margin
    pre-study; see tests). One pass with a moderate step keeps the span
    scorer soft enough that its confidences stay informative."""
    from .reader import TrainConfig

    return TrainConfig(epochs=1, learning_rate=0.008, seed=seed)


def merge_datasets(parts: list[Dataset], language: str = "en") -> Dataset:
    contexts: list[Context] = []
    questions: list[Question] = []
    answers: dict[str, list[AnswerSpan]] = {}
    for ds in parts:
        contexts.extend(ds.contexts)
        questions.extend(ds.questions)
        for qid, spans in ds.answers.items():
            answers[qid] = list(spans)
    return Dataset(contexts, questions, answers, language=language)


@dataclass
class NoiseFixture:
    """Target corpus with four engineered strata for threshold studies,
    paired with a hand-calibrated reader. The reader answers clean examples
    confidently and correctly; ambiguous ones (junk) wrongly below 0.6
    confidence; double-decoy ones (trap) wrongly in the 0.6-0.7 band; and
    strong-decoy ones (drag) wrongly above 0.9. The marginal label bands are
    therefore majority-wrong below 0.7 and majority-right at 0.7+, with a
    standing poison above 0.9, so retraining pays off only for thresholds
    that keep the 0.7-0.9 slice."""

    m0: object  # calibrated reader (ToyModel)
    target_train: Dataset
    target_train_gold: Dataset
    target_dev: Dataset


def calibrated_noise_fixture(
    seed: int = 11,
    n_clean: int = 300,
    n_junk: int = 120,
    n_trap: int = 130,
    n_drag: int = 26,
    dev_scale: float = 0.6,
) -> NoiseFixture:
    from .reader import ToyModel, TrainConfig

    vocab = make_vocab(240, seed * 13 + 1)
    cue_pairs = [
        ("zorp", "blik"),
        ("quin", "marv"),
        ("felt", "dusk"),
        ("grum", "pell"),
    ]

    def build(counts: tuple[int, int, int, int], tag: str, base_seed: int) -> Dataset:
        clean = generate_cue_corpus(
            CueCorpusSpec(
                n_questions=counts[0],
                seed=base_seed + 1,
                vocab=vocab,
                cue_pairs=cue_pairs,
                context_len=(64, 84),
                answer_band=(0.55, 0.95),
                fake_rate=0.0,
                id_prefix=f"{tag}cl",
            )
        )
        junk = generate_cue_corpus(
            CueCorpusSpec(
                n_questions=counts[1],
                seed=base_seed + 2,
                vocab=vocab,
                cue_pairs=cue_pairs,
                context_len=(13, 20),
                answer_band=(0.55, 0.95),
                fake_rate=1.0,
                id_prefix=f"{tag}jk",
            )
        )
        trap = generate_cue_corpus(
            CueCorpusSpec(
                n_questions=counts[2],
                seed=base_seed + 4,
                vocab=vocab,
                cue_pairs=cue_pairs,
                context_len=(40, 54),
                answer_band=(0.6, 0.95),
                fake_rate=1.0,
                fake_count=2,
                fake_boost_rate=1.0,
                id_prefix=f"{tag}tr",
            )
        )
        drag = generate_cue_corpus(
            CueCorpusSpec(
                n_questions=counts[3],
                seed=base_seed + 3,
                vocab=vocab,
                cue_pairs=cue_pairs,
                context_len=(13, 16),
                answer_band=(0.55, 0.95),
                fake_rate=1.0,
                fake_boost_rate=1.0,
                id_prefix=f"{tag}dr",
            )
        )
        return merge_datasets([clean, junk, trap, drag])

    gold = build((n_clean, n_junk, n_trap, n_drag), "nt", seed * 13 + 100)
    dev = build(
        (
            int(n_clean * dev_scale),
            int(n_junk * dev_scale),
            int(n_trap * dev_scale),
            int(n_drag * dev_scale),
        ),
        "nd",
        seed * 13 + 200,
    )
    cfg = TrainConfig(epochs=5, learning_rate=0.03, seed=seed)
    m0 = ToyModel(
        w_start=(2.4, -1.2, -0.1, 0.0),
        w_end=(2.4, -1.2, -0.1, 0.0),
        config=cfg,
        language="en",
    )
    return NoiseFixture(
        m0=m0,
        target_train=strip_labels(gold),
        target_train_gold=gold,
        target_dev=dev,
    )


def simulate_label_precision(
    m0, target_unlabeled: Dataset, target_gold: Dataset, thetas: list[float], decode_cfg
) -> dict[float, dict]:
    """Brute-force label-quality simulation: label once with no threshold,
    compare every pseudo-answer against gold, then report per threshold the
    counts of right/wrong labels among those admitted. The threshold whose
    slice maximizes right-minus-wrong predicts where self-training pays off
    most."""
    from .metrics import f1_score
    from .pseudo_label import label as run_label

    pseudo = run_label(m0, target_unlabeled, 0.0, decode_cfg)
    scored = []
    for lab in pseudo.labels:
        golds = [a.text for a in target_gold.golds(lab.question_id)]
        good = f1_score(lab.answer.text, golds, target_gold.language) > 0.99
        scored.append((lab.confidence, good))
    out: dict[float, dict] = {}
    for theta in thetas:
        right = sum(1 for c, good in scored if c >= theta and good)
        wrong = sum(1 for c, good in scored if c >= theta and not good)
        total = right + wrong
        out[theta] = {
            "labels": total,
            "right": right,
            "wrong": wrong,
            "precision": right / total if total else None,
            "net": right - wrong,
        }
    return out


def write_fixture_files(fixture: BilingualFixture, out_dir) -> dict[str, str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "source": out / "source.json",
        "target_train": out / "target_train.json",
        "target_train_gold": out / "target_train_gold.json",
        "target_dev": out / "target_dev.json",
    }
    save_squad_json(fixture.source, paths["source"])
    save_squad_json(fixture.target_train, paths["target_train"])
    save_squad_json(fixture.target_train_gold, paths["target_train_gold"])
    save_squad_json(fixture.target_dev, paths["target_dev"])
    return {k: str(v) for k, v in paths.items()}


if __name__ == "__main__":
    import argparse

    ap = argparse.ArgumentParser(description="generate the synthetic bilingual fixture")
    ap.add_argument("--out-dir", required=True)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    written = write_fixture_files(bilingual_cipher_fixture(seed=args.seed), args.out_dir)
    for name, p in written.items():
        print(f"{name}: {p}")

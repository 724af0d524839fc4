"""Two-stage fine-tune then self-train loop with run persistence.

Every self-training iteration retrains from the fine-tuned model M0, never
from the previous iteration's model; the serialized input of each train call
is hash-checked against the m0 checkpoint.

Run directory layout:
    run_dir/
      config.json
      m0.ckpt
      iter_<i>/ pseudo.json  sidecar.json  model.ckpt  eval.json
"""

from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import Dataset, load_squad_json
from .decoder import DecodeConfig, best_answer, decode
from .errors import ConfigError, ContractError
from .metrics import EvalReport, evaluate
from .numerics import sha256_hex
from .pseudo_label import PseudoDataset, label
from .reader import TrainConfig, checkpoint_bytes, predict, train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    iterations: int = 3
    theta: float = 0.7
    train_config: TrainConfig = field(default_factory=TrainConfig)
    decode_config: DecodeConfig = field(default_factory=DecodeConfig)
    source_path: str | None = None
    target_path: str | None = None
    eval_path: str | None = None
    run_dir: str | None = None
    language: str = "en"
    jobs: int = 1

    def __post_init__(self):
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.theta < 0:
            raise ConfigError("theta must be >= 0")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def to_json_dict(self) -> dict:
        # run_dir is deliberately not recorded: artifacts must not depend on
        # where they are written, so identical runs stay byte-identical.
        return {
            "iterations": self.iterations,
            "theta": self.theta,
            "train_config": self.train_config.to_json_dict(),
            "decode_config": self.decode_config.to_json_dict(),
            "source_path": self.source_path,
            "target_path": self.target_path,
            "eval_path": self.eval_path,
            "language": self.language,
        }


@dataclass
class IterationRecord:
    iteration: int
    pseudo_label_count: int
    eval: EvalReport | None
    model_checkpoint: str
    trained_from_hash: str | None = None
    trained: bool = False


def predict_answer_text(model, dataset: Dataset, question, decode_cfg: DecodeConfig) -> str:
    ctx = dataset.context_of(question)
    top = best_answer(
        decode(predict(model, ctx, question, dataset.language), ctx, decode_cfg)
    )
    return top.text if top is not None else ""


def evaluate_model(model, gold: Dataset, decode_cfg: DecodeConfig, jobs: int = 1) -> EvalReport:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            texts = list(
                pool.map(lambda q: predict_answer_text(model, gold, q, decode_cfg), gold.questions)
            )
    else:
        texts = [predict_answer_text(model, gold, q, decode_cfg) for q in gold.questions]
    predictions = {q.id: t for q, t in zip(gold.questions, texts)}
    return evaluate(predictions, gold)


def finetune(model, d_s: Dataset, cfg: TrainConfig, run_dir=None):
    """Supervised fine-tuning on the labeled source corpus; yields M0."""
    if not d_s.labeled:
        raise ContractError("finetune requires a labeled source dataset")
    if len(d_s.questions) == 0:
        warnings.warn("finetune called with an empty dataset; model unchanged")
        m0 = model
    else:
        m0 = train(model, d_s, cfg)
    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "m0.ckpt").write_bytes(checkpoint_bytes(m0))
    return m0


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _write_iteration(
    it_dir: Path, model, pseudo: PseudoDataset, report: EvalReport | None
) -> None:
    it_dir.mkdir(parents=True)
    (it_dir / "model.ckpt").write_bytes(checkpoint_bytes(model))
    pseudo.save(it_dir / "pseudo.json", it_dir / "sidecar.json")
    if report is not None:
        _write_json(it_dir / "eval.json", report.to_json_dict())


def self_train(
    m0, d_t: Dataset, run: RunConfig, gold: Dataset | None = None
) -> tuple[object, list[IterationRecord]]:
    """Iterate label-then-retrain for run.iterations rounds from M0.

    Returns the final model plus one record per iteration, index 0 being the
    zero-shot record for M0 itself. An iteration whose previous pseudo-label
    set is empty skips training and carries M0 forward.
    """
    if run.run_dir is None:
        raise ConfigError("run.run_dir is required")
    run_dir = Path(run.run_dir)
    if run_dir.exists() and any(run_dir.iterdir()):
        raise ConfigError(f"run directory {run_dir} is not empty")
    run_dir.mkdir(parents=True, exist_ok=True)
    _write_json(run_dir / "config.json", run.to_json_dict())
    m0_bytes = checkpoint_bytes(m0)
    (run_dir / "m0.ckpt").write_bytes(m0_bytes)
    m0_hash = sha256_hex(m0_bytes)

    records: list[IterationRecord] = []
    pseudo = label(m0, d_t, run.theta, run.decode_config, iteration=0, jobs=run.jobs)
    report = evaluate_model(m0, gold, run.decode_config, run.jobs) if gold else None
    it_dir = run_dir / "iter_0"
    _write_iteration(it_dir, m0, pseudo, report)
    records.append(
        IterationRecord(
            iteration=0,
            pseudo_label_count=len(pseudo.labels),
            eval=report,
            model_checkpoint=str(it_dir / "model.ckpt"),
        )
    )
    logger.info("iteration 0 (zero-shot): %d pseudo-labels", len(pseudo.labels))

    current = m0
    for i in range(1, run.iterations + 1):
        input_bytes = checkpoint_bytes(m0)
        input_hash = sha256_hex(input_bytes)
        assert input_hash == m0_hash, "iteration input drifted away from m0"
        if pseudo.labels:
            model_i = train(m0, pseudo.to_dataset(), run.train_config)
            trained = True
        else:
            logger.warning("iteration %d: empty pseudo-label set, training skipped", i)
            model_i = m0
            trained = False
        pseudo = label(
            model_i, d_t, run.theta, run.decode_config, iteration=i, jobs=run.jobs
        )
        report = (
            evaluate_model(model_i, gold, run.decode_config, run.jobs) if gold else None
        )
        it_dir = run_dir / f"iter_{i}"
        _write_iteration(it_dir, model_i, pseudo, report)
        records.append(
            IterationRecord(
                iteration=i,
                pseudo_label_count=len(pseudo.labels),
                eval=report,
                model_checkpoint=str(it_dir / "model.ckpt"),
                trained_from_hash=input_hash,
                trained=trained,
            )
        )
        logger.info(
            "iteration %d: %d pseudo-labels%s",
            i,
            len(pseudo.labels),
            f", f1={report.f1:.2f}" if report else "",
        )
        current = model_i
    return current, records


@dataclass
class IterationArtifact:
    index: int
    directory: Path
    sidecar: dict
    eval: EvalReport | None

    def pseudo_dataset_path(self) -> Path:
        return self.directory / "pseudo.json"


@dataclass
class RunArtifacts:
    run_dir: Path
    config: dict
    iterations: list[IterationArtifact]


def load_run(run_dir) -> RunArtifacts:
    """Parse a persisted run directory back into memory."""
    run_dir = Path(run_dir)
    config = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
    iter_dirs = sorted(
        (d for d in run_dir.iterdir() if d.is_dir() and d.name.startswith("iter_")),
        key=lambda d: int(d.name.split("_", 1)[1]),
    )
    iterations = []
    for d in iter_dirs:
        sidecar = json.loads((d / "sidecar.json").read_text(encoding="utf-8"))
        eval_path = d / "eval.json"
        report = None
        if eval_path.exists():
            report = EvalReport.from_json_dict(
                json.loads(eval_path.read_text(encoding="utf-8"))
            )
        iterations.append(
            IterationArtifact(
                index=int(d.name.split("_", 1)[1]),
                directory=d,
                sidecar=sidecar,
                eval=report,
            )
        )
    return RunArtifacts(run_dir=run_dir, config=config, iterations=iterations)

"""Command-line entry point.

Commands: finetune, selftrain, label, eval, analyze, sweep.
Exit codes: 0 success, 1 validation/usage error, 2 I/O or transport error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis
from .corpus import load_squad_json
from .decoder import DecodeConfig
from .errors import (
    ConfigError,
    ContractError,
    DatasetValidationError,
    FormatError,
    LabelingAborted,
    MissingLabelError,
    ReaderError,
    SpanforgeError,
    TransportError,
)
from .metrics import evaluate
from .pseudo_label import label as run_label
from .reader import TrainConfig, load_checkpoint, new_toy_model, save_checkpoint, train
from .selftrain import RunConfig, finetune, load_run, self_train
from .wire import ExternalReader, ReaderClient, StdioTransport, TcpTransport

_USAGE_ERROR = 1
_IO_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad flags, not argparse's 2
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=5e-5)
    p.add_argument("--max-context-tokens", type=int, default=384)
    p.add_argument("--max-question-tokens", type=int, default=64)
    p.add_argument("--doc-stride", type=int, default=128)


def _add_decode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beam-size", type=int, default=20)
    p.add_argument("--max-answer-tokens", type=int, default=30)


def _add_reader_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--reader", choices=["toy", "external"], default="toy")
    p.add_argument("--cmd", help="spawn command for an external stdio reader")
    p.add_argument("--addr", help="host:port of an external TCP reader")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lang", default="en")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="spanforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", parents=[], help="train M0 on a labeled source corpus")
    p.add_argument("--source", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_train_flags(p)
    _add_reader_flags(p)

    p = sub.add_parser("selftrain", help="iterative pseudo-label self-training from M0")
    p.add_argument("--m0", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--theta", type=float, default=0.7)
    p.add_argument("--eval", dest="eval_path")
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_train_flags(p)
    _add_decode_flags(p)
    _add_reader_flags(p)

    p = sub.add_parser("label", help="write one pseudo-label dump")
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--theta", type=float, default=0.7)
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_decode_flags(p)
    _add_reader_flags(p)

    p = sub.add_parser("eval", help="score a prediction file against a gold corpus")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    _add_common(p)

    p = sub.add_parser("analyze", help="per-type improvement breakdown of a run")
    p.add_argument("--run", required=True)
    p.add_argument("--gold", required=True)
    _add_common(p)

    p = sub.add_parser("sweep", help="self-train once per threshold from the same M0")
    p.add_argument("--m0", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--thetas", default="0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--out", required=True)
    _add_common(p)
    _add_train_flags(p)
    _add_decode_flags(p)
    _add_reader_flags(p)
    return parser


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("SPANFORGE_JOBS")
    return max(1, int(env)) if env else 1


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
        max_context_tokens=args.max_context_tokens,
        max_question_tokens=args.max_question_tokens,
        doc_stride=args.doc_stride,
    )


def _decode_config(args) -> DecodeConfig:
    return DecodeConfig(beam_size=args.beam_size, max_answer_tokens=args.max_answer_tokens)


def _make_external(args) -> ExternalReader:
    if args.cmd:
        transport = StdioTransport(args.cmd)
    elif args.addr:
        transport = TcpTransport(args.addr)
    else:
        raise _UsageError("--reader external requires --cmd or --addr")
    return ExternalReader(ReaderClient(transport), language=args.lang)


def _load_model(args, ckpt_path: str):
    if args.reader == "external":
        reader = _make_external(args)
        payload = json.loads(Path(ckpt_path).read_text(encoding="utf-8"))
        if payload.get("kind") != "external" or not payload.get("model_id"):
            raise ContractError(f"{ckpt_path} is not an external reader checkpoint")
        reader.model_id = payload["model_id"]
        reader.language = payload.get("language", args.lang)
        return reader
    return load_checkpoint(ckpt_path)


def _init_model(args, cfg: TrainConfig):
    if args.reader == "external":
        return _make_external(args)
    return new_toy_model(cfg, language=args.lang)


def _cmd_finetune(args) -> int:
    cfg = _train_config(args)
    d_s = load_squad_json(args.source, expect_labels=True, language=args.lang)
    model = _init_model(args, cfg)
    out = Path(args.out)
    m0 = finetune(model, d_s, cfg, run_dir=out)
    config = {
        "command": "finetune",
        "source_path": args.source,
        "language": args.lang,
        "reader": args.reader,
        "train_config": cfg.to_json_dict(),
    }
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"checkpoint": str(out / "m0.ckpt")}))
    return 0


def _cmd_selftrain(args) -> int:
    m0 = _load_model(args, args.m0)
    d_t = load_squad_json(args.target, expect_labels=False, language=args.lang)
    gold = (
        load_squad_json(args.eval_path, expect_labels=True, language=args.lang)
        if args.eval_path
        else None
    )
    run = RunConfig(
        iterations=args.iters,
        theta=args.theta,
        train_config=_train_config(args),
        decode_config=_decode_config(args),
        target_path=args.target,
        eval_path=args.eval_path,
        run_dir=args.out,
        language=args.lang,
        jobs=_jobs(args),
    )
    _, records = self_train(m0, d_t, run, gold)
    last = records[-1]
    summary = {
        "iterations": len(records) - 1,
        "final_pseudo_labels": last.pseudo_label_count,
    }
    if last.eval is not None:
        summary["final_em"] = last.eval.em
        summary["final_f1"] = last.eval.f1
    print(json.dumps(summary))
    return 0


def _cmd_label(args) -> int:
    model = _load_model(args, args.model)
    d_t = load_squad_json(args.target, expect_labels=False, language=args.lang)
    pseudo = run_label(
        model, d_t, args.theta, _decode_config(args), jobs=_jobs(args)
    )
    out = Path(args.out)
    sidecar = out.with_name(out.stem + ".sidecar.json")
    pseudo.save(out, sidecar)
    print(json.dumps({"labeled": len(pseudo.labels), "out": str(out)}))
    return 0


def _cmd_eval(args) -> int:
    with open(args.pred, encoding="utf-8") as fh:
        predictions = json.load(fh)
    if not isinstance(predictions, dict):
        raise FormatError(f"{args.pred}: prediction file must map question id to answer")
    gold = load_squad_json(args.gold, expect_labels=True, language=args.lang)
    report = evaluate(predictions, gold)
    print(json.dumps({"em": report.em, "f1": report.f1, "n": report.n}))
    return 0


def _cmd_analyze(args) -> int:
    run = load_run(args.run)
    gold = load_squad_json(args.gold, expect_labels=True, language=args.lang)
    target_path = run.config.get("target_path")
    if not target_path:
        raise ContractError("run config.json lacks target_path")
    target = load_squad_json(target_path, expect_labels=False, language=args.lang)
    out_dir = Path(args.run) / "analysis"
    out_dir.mkdir(exist_ok=True)
    for axis in ("question", "answer"):
        breakdown = analysis.breakdown_report(run, gold, target, axis=axis)
        with open(out_dir / f"{axis}_breakdown.json", "w", encoding="utf-8") as fh:
            json.dump(breakdown.to_json_dict(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
        (out_dir / f"{axis}_table.txt").write_text(
            analysis.format_breakdown_table(breakdown), encoding="utf-8"
        )
        analysis.write_scatter_csv(
            breakdown, out_dir / f"{axis}_delta_vs_zero_shot.csv", "zero_shot_f1"
        )
        analysis.write_scatter_csv(
            breakdown, out_dir / f"{axis}_delta_vs_pseudo_count.csv", "pseudo_label_count"
        )
    print(json.dumps({"analysis_dir": str(out_dir)}))
    return 0


def _cmd_sweep(args) -> int:
    m0 = _load_model(args, args.m0)
    d_t = load_squad_json(args.target, expect_labels=False, language=args.lang)
    gold = load_squad_json(args.gold, expect_labels=True, language=args.lang)
    try:
        thetas = [float(x) for x in args.thetas.split(",") if x]
    except ValueError as exc:
        raise _UsageError(f"bad --thetas value: {exc}") from exc
    run = RunConfig(
        iterations=args.iters,
        theta=thetas[0],
        train_config=_train_config(args),
        decode_config=_decode_config(args),
        target_path=args.target,
        eval_path=args.gold,
        run_dir=args.out,
        language=args.lang,
        jobs=_jobs(args),
    )
    results = analysis.threshold_sweep(m0, d_t, gold, thetas, run)
    best = max(results, key=lambda t: results[t].f1)
    print(
        json.dumps(
            {
                "best_theta": best,
                "f1": {f"{t:g}": results[t].f1 for t in thetas},
            }
        )
    )
    return 0


_COMMANDS = {
    "finetune": _cmd_finetune,
    "selftrain": _cmd_selftrain,
    "label": _cmd_label,
    "eval": _cmd_eval,
    "analyze": _cmd_analyze,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return _USAGE_ERROR
    except (FormatError, DatasetValidationError, MissingLabelError, ContractError,
            ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_ERROR
    except (OSError, TransportError, ReaderError, LabelingAborted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _IO_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

"""Command-line pipeline: ingest -> preprocess -> split -> train -> evaluate
-> ensemble-eval -> report.

Every command appends an entry to ``run-manifest.jsonl`` in its output
directory (command, config hash, input digests, seed, timestamps, outputs),
so a full run leaves an auditable chain from raw file to report. Exit codes:
0 success, 1 internal error, 2 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import traceback
from datetime import datetime, timezone
from pathlib import Path

from .corpus import (
    CorpusError,
    distribution,
    iter_labeled_jsonl,
    label_samples,
    labeled_to_dict,
    load_corpus,
    read_labeled_jsonl,
    write_labeled_jsonl,
)
from .ensemble import EnsembleConfig, ensemble_predict
from .models import CheckpointError, ModelConfig, load_model, predict_dataset
from .preprocess import normalize_text
from .reporting import (
    dump_json,
    emit_report,
    read_predictions_jsonl,
    write_predictions_jsonl,
)
from .splitter import SPLIT_NAMES, DatasetSplit, SplitSpec, stratified_split, stratum_table
from .trainer import TrainConfig, evaluate_epoch, train

_BAD_INPUT_ERRORS = (CorpusError, CheckpointError, ValueError, OSError, KeyError, json.JSONDecodeError)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _append_manifest(out_dir, command, started, inputs, outputs, seed=None, config_path=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entry = {
        "command": command,
        "config_hash": _sha256(config_path) if config_path else None,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "started_at": started,
        "finished_at": _utcnow(),
    }
    with (out_dir / "run-manifest.jsonl").open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")


def _load_config(path) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text("utf-8"))


def _seed(args, config: dict, fallback: int = 42) -> int:
    if args.seed is not None:
        return args.seed
    return int(config.get("seed", fallback))


def cmd_ingest(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    fmt = args.format or ("jsonl" if str(args.input).endswith(".jsonl") else "csv")
    samples, rejects = load_corpus(args.input, fmt)
    labeled = label_samples(samples)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"
    rejects_path = out_dir / "rejects.jsonl"
    write_labeled_jsonl(corpus_path, labeled)
    with rejects_path.open("w", encoding="utf-8") as fh:
        for reject in rejects:
            fh.write(json.dumps({"row": reject.row, "reason": reject.reason}) + "\n")

    for table in distribution(labeled, by_language=True):
        shares = " ".join(f"{p:.1%}" for p in table.percentages)
        print(f"{table.scope}: n={table.population} ({shares})")
    print(f"accepted {len(labeled)} rows, rejected {len(rejects)}")
    _append_manifest(
        out_dir, "ingest", started,
        inputs=[args.input], outputs=[corpus_path, rejects_path],
        seed=_seed(args, config), config_path=args.config,
    )
    return 0


def cmd_preprocess(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    clean_path = out_dir / "clean.jsonl"
    dropped_path = out_dir / "dropped.jsonl"

    kept = dropped = 0
    with clean_path.open("w", encoding="utf-8") as clean_fh, dropped_path.open(
        "w", encoding="utf-8"
    ) as dropped_fh:
        for sample in iter_labeled_jsonl(args.input):
            text = normalize_text(sample.text_clean)
            if text:
                clean_fh.write(
                    json.dumps(labeled_to_dict(sample.with_text(text)), ensure_ascii=False) + "\n"
                )
                kept += 1
            else:
                dropped_fh.write(json.dumps({"id": sample.id}) + "\n")
                dropped += 1
    print(f"kept {kept}, dropped {dropped}")
    _append_manifest(
        out_dir, "preprocess", started,
        inputs=[args.input], outputs=[clean_path, dropped_path],
        seed=_seed(args, config), config_path=args.config,
    )
    if kept == 0:
        print("error: no samples survived preprocessing", file=sys.stderr)
        return 2
    return 0


def cmd_split(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    seed = _seed(args, config)
    ratios = tuple(args.ratios or config.get("split", {}).get("ratios", (0.8, 0.1, 0.1)))
    spec = SplitSpec(ratios=ratios, seed=seed)

    corpus = read_labeled_jsonl(args.input)
    split = stratified_split(corpus, spec)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    for name in SPLIT_NAMES:
        path = out_dir / f"{name}.jsonl"
        write_labeled_jsonl(path, getattr(split, name))
        files[name] = path.name
    manifest_path = out_dir / "split-manifest.json"
    dump_json(
        manifest_path,
        {
            "seed": seed,
            "ratios": list(ratios),
            "files": files,
            "counts": {name: len(getattr(split, name)) for name in SPLIT_NAMES},
            "strata": stratum_table(split),
        },
    )
    print(
        f"split {len(corpus)} samples -> "
        + ", ".join(f"{name}={len(getattr(split, name))}" for name in SPLIT_NAMES)
    )
    _append_manifest(
        out_dir, "split", started,
        inputs=[args.input],
        outputs=[out_dir / files[name] for name in SPLIT_NAMES] + [manifest_path],
        seed=seed, config_path=args.config,
    )
    return 0


def _split_from_manifest(manifest_path) -> DatasetSplit:
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text("utf-8"))
    parts = {}
    for name in SPLIT_NAMES:
        path = manifest_path.parent / manifest["files"][name]
        parts[name] = tuple(read_labeled_jsonl(path)) if path.exists() else ()
    return DatasetSplit(**parts)


def cmd_train(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    model_cfg = ModelConfig.from_dict(config.get("model", {"checkpoint_id": "toy"}))
    train_section = dict(config.get("train", {}))
    if args.seed is not None:
        train_section["seed"] = args.seed
    train_cfg = TrainConfig.from_dict(train_section)

    split = _split_from_manifest(args.data)
    handle = load_model(model_cfg)
    run_dir = Path(args.out)
    _, history = train(handle, split, train_cfg, run_dir=run_dir)
    for entry in history:
        print(
            f"epoch {entry.epoch}: loss={entry.mean_train_loss:.4f} "
            f"acc={entry.accuracy:.4f} macro_f1={entry.macro_f1:.4f}"
        )
    _append_manifest(
        run_dir, "train", started,
        inputs=[args.data],
        outputs=[run_dir / "config.json", run_dir / "metrics.jsonl",
                 run_dir / "checkpoint-best", run_dir / "checkpoint-last"],
        seed=train_cfg.seed, config_path=args.config,
    )
    return 0


def cmd_evaluate(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    model_section = dict(config.get("model", {}))
    if args.checkpoint is not None:
        model_section["checkpoint_id"] = str(args.checkpoint)
    if "checkpoint_id" not in model_section:
        raise ValueError("no checkpoint: pass --checkpoint or config['model']['checkpoint_id']")
    handle = load_model(ModelConfig.from_dict(model_section))

    dataset = read_labeled_jsonl(args.data)
    records = predict_dataset(handle, dataset)
    entry = evaluate_epoch(handle, dataset)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions_path = out_dir / "predictions.jsonl"
    metrics_path = out_dir / "metrics.json"
    write_predictions_jsonl(predictions_path, records)
    dump_json(metrics_path, entry.to_dict())
    print(f"accuracy={entry.accuracy:.4f} macro_f1={entry.macro_f1:.4f} n={len(records)}")
    _append_manifest(
        out_dir, "evaluate", started,
        inputs=[args.data], outputs=[predictions_path, metrics_path],
        seed=_seed(args, config), config_path=args.config,
    )
    return 0


def cmd_ensemble_eval(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    if "ensemble" not in config:
        raise ValueError("config file must define an 'ensemble' section")
    ensemble_cfg = EnsembleConfig.from_dict(config["ensemble"])
    members = [load_model(member) for member in ensemble_cfg.members]

    dataset = read_labeled_jsonl(args.data)
    records = ensemble_predict(members, dataset, ensemble_cfg)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions_path = out_dir / "predictions.jsonl"
    write_predictions_jsonl(predictions_path, records)
    agreement = sum(
        1 for r in records if all(v == r.predicted for v in (r.member_votes or ()))
    )
    print(f"voted {len(records)} samples with {len(members)} members "
          f"({agreement} unanimous)")
    _append_manifest(
        out_dir, "ensemble-eval", started,
        inputs=[args.data], outputs=[predictions_path],
        seed=_seed(args, config), config_path=args.config,
    )
    return 0


def cmd_report(args) -> int:
    started = _utcnow()
    config = _load_config(args.config)
    records = read_predictions_jsonl(args.predictions)
    if not records:
        print("error: predictions file has no records", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    written = emit_report(records, out_dir)

    report = json.loads((out_dir / "report.json").read_text("utf-8"))
    print(json.dumps(rounded_report_from_dict(report), indent=2, sort_keys=True))
    _append_manifest(
        out_dir, "report", started,
        inputs=[args.predictions],
        outputs=[p for paths in written.values() for p in paths],
        seed=_seed(args, config), config_path=args.config,
    )
    return 0


def rounded_report_from_dict(report: dict, ndigits: int = 4) -> dict:
    def walk(node):
        if isinstance(node, dict):
            return {k: walk(v) for k, v in node.items()}
        if isinstance(node, float):
            return round(node, ndigits)
        return node

    return walk(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polysent",
        description="Multilingual tweet sentiment pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="declarative JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ingest", help="load the raw tweet table and attach labels")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default=None)
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="normalize text, dropping noise-only rows")
    p.add_argument("--input", required=True)
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("split", help="stratified train/val/test partition")
    p.add_argument("--input", required=True)
    p.add_argument("--ratios", type=float, nargs=3, default=None, metavar=("TRAIN", "VAL", "TEST"))
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fine-tune a classifier on a split")
    p.add_argument("--data", required=True, help="split-manifest.json from `split`")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a labeled dataset with one checkpoint")
    p.add_argument("--checkpoint", default=None, help="checkpoint dir or id")
    p.add_argument("--data", required=True)
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ensemble-eval", help="majority-vote several checkpoints")
    p.add_argument("--data", required=True)
    common(p)
    p.set_defaults(func=cmd_ensemble_eval)

    p = sub.add_parser("report", help="emit report JSON, matrix CSVs, and plots")
    p.add_argument("--predictions", required=True)
    common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _BAD_INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())

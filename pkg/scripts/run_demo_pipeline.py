#!/usr/bin/env python3
"""Run the whole pipeline on the bundled demo corpus with toy encoders.

Everything is offline and CPU-only: ingest -> preprocess -> split -> train
two toy members -> ensemble-eval on the test split -> report. Outputs land
in ./demo-output (override with --out). Takes well under a minute.
"""

import argparse
import json
import sys
from pathlib import Path

from polysent.cli import main as polysent

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "tests" / "fixtures" / "tweets_demo.csv"


def run(argv: list[str]) -> None:
    print("+ polysent " + " ".join(argv))
    code = polysent(argv)
    if code != 0:
        sys.exit(f"step failed with exit code {code}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="demo-output")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--epochs", type=int, default=2)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    train_cfg = {
        "epochs": args.epochs,
        "learning_rate": 3e-3,
        "batch_size": 8,
        "seed": args.seed,
        "determinism": True,
    }
    member_ids = ["toy:11", "toy:22"]
    configs = {}
    for i, checkpoint in enumerate(member_ids, start=1):
        path = out / f"member{i}.json"
        path.write_text(
            json.dumps(
                {
                    "seed": args.seed,
                    "model": {"checkpoint_id": checkpoint, "max_seq_len": 48},
                    "train": train_cfg,
                }
            ),
            "utf-8",
        )
        configs[checkpoint] = path

    run(["ingest", "--input", str(FIXTURE), "--out", str(out)])
    run(["preprocess", "--input", str(out / "corpus.jsonl"), "--out", str(out)])
    run(["split", "--input", str(out / "clean.jsonl"), "--seed", str(args.seed), "--out", str(out)])

    run_dirs = []
    for i, checkpoint in enumerate(member_ids, start=1):
        run_dir = out / f"runs/member{i}"
        run_dirs.append(run_dir)
        run([
            "train",
            "--config", str(configs[checkpoint]),
            "--data", str(out / "split-manifest.json"),
            "--out", str(run_dir),
        ])

    run([
        "evaluate",
        "--checkpoint", str(run_dirs[0] / "checkpoint-best"),
        "--data", str(out / "test.jsonl"),
        "--out", str(out / "eval-member1"),
    ])

    ensemble_cfg = out / "ensemble.json"
    ensemble_cfg.write_text(
        json.dumps(
            {
                "seed": args.seed,
                "ensemble": {
                    "members": [
                        {"checkpoint_id": str(d / "checkpoint-best"), "max_seq_len": 48}
                        for d in run_dirs
                    ],
                    "tie_break": "sum_scores",
                },
            }
        ),
        "utf-8",
    )
    run([
        "ensemble-eval",
        "--config", str(ensemble_cfg),
        "--data", str(out / "test.jsonl"),
        "--out", str(out / "ensemble"),
    ])
    run([
        "report",
        "--predictions", str(out / "ensemble" / "predictions.jsonl"),
        "--out", str(out / "report"),
    ])
    print(f"\ndone; see {out / 'report'}")


if __name__ == "__main__":
    main()

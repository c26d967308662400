#!/usr/bin/env python3
"""End-to-end demo: pretrain to the source, repurpose to the target, score.

Every artifact-producing step goes through the installed CLI, so this
doubles as a living example of the command surface. Only the target
train/validation splits are drawn through the library, because the
sample subcommand draws from generator checkpoints, not from configs.

Usage: python3 scripts/run_pipeline.py [--config configs/mixture.cfg]
                                       [--workdir pipeline_out]
"""

import argparse
import subprocess
import sys
from pathlib import Path

from fdopt.config import load_config
from fdopt.formats import write_features
from fdopt.trainer import sample_target


def cli(*args) -> None:
    cmd = [sys.executable, "-m", "fdopt.cli", *map(str, args)]
    print("+ fdopt " + " ".join(cmd[3:]))
    subprocess.run(cmd, check=True)


def main() -> None:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--config", default="configs/mixture.cfg")
    parser.add_argument("--workdir", default="pipeline_out")
    parser.add_argument("--n", type=int, default=8192, help="samples per split")
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    train_bin = work / "train.bin"
    val_bin = work / "val.bin"

    target = load_config(args.config).train.target
    write_features(str(train_bin), sample_target(target, args.n, "pipeline-train"))
    write_features(str(val_bin), sample_target(target, args.n // 2, "pipeline-val"))
    print(f"wrote target splits to {train_bin} and {val_bin}")

    pre, post = work / "pre.ckpt", work / "post.ckpt"
    log, gen = work / "log.csv", work / "gen.bin"
    report = work / "report.csv"

    cli("pretrain", "--config", args.config, "--out", pre)
    cli("train", "--config", args.config, "--init", pre, "--out", post, "--log", log)
    cli("sample", "--ckpt", post, "--n", args.n // 2, "--seed", 3, "--out", gen)
    cli("compute-stats", "--features", train_bin, "--out", work / "train.stats")
    cli("fd", "--ref", work / "train.stats", "--gen", gen)
    cli(
        "fdr",
        "--train",
        train_bin,
        "--val",
        val_bin,
        "--gen",
        gen,
        "--config",
        args.config,
        "--out",
        report,
    )
    cli("report", "--log", log)
    print(f"done; artifacts under {work}/")


if __name__ == "__main__":
    main()

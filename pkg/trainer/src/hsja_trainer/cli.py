"""Batch CLI mirroring the training-job fields."""

from __future__ import annotations

import argparse
import sys

from .jobs import TrainingFailed, TrainingJob, train_and_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsja-train",
        description="Train a tiny model and export it as portable JSON with fixtures.",
    )
    parser.add_argument("--dataset", default="moons", choices=["moons", "digits"])
    parser.add_argument("--model", default="mlp", choices=["mlp", "tree_ensemble"])
    parser.add_argument("--hidden", default="48,24", help="MLP hidden widths, comma separated")
    parser.add_argument("--trees", type=int, default=60, help="ensemble size")
    parser.add_argument(
        "--binarize", default=None,
        help="binarization threshold in (0,1) for tree ensembles, or 'none'",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--outdir", default="models")
    parser.add_argument("--name", default=None, help="output basename (default derived)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    binarize = None
    if args.binarize not in (None, "none"):
        binarize = float(args.binarize)
    job = TrainingJob(
        dataset=args.dataset,
        model_kind=args.model,
        hidden=tuple(int(w) for w in args.hidden.split(",") if w),
        n_trees=args.trees,
        binarize_threshold=binarize,
        seed=args.seed,
        output_dir=args.outdir,
        name=args.name,
    )
    try:
        model_path, fixtures_path, accuracy = train_and_export(job)
    except TrainingFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"test accuracy {accuracy:.3f}")
    print(f"wrote {model_path}")
    print(f"wrote {fixtures_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

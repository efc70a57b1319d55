"""Command line: run the evaluator loop on stdin/stdout."""

from __future__ import annotations

import argparse

import torch

from .protocol import serve
from .train import TrainerConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tiny-trainer",
        description="Toy super-resolution trainer speaking the esrn-eval "
                    "line protocol on stdin/stdout")
    parser.add_argument("--data", help="image folder for training tiles")
    parser.add_argument("--synthetic", action="store_true",
                        help="use the built-in procedural texture set")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--steps-per-budget", type=int, default=100)
    parser.add_argument("--patch-size", type=int, default=32)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--threads", type=int, default=0,
                        help="torch CPU threads (0 = library default)")
    args = parser.parse_args(argv)

    if args.threads > 0:
        torch.set_num_threads(args.threads)
    config = TrainerConfig(
        patch_size=args.patch_size,
        batch_size=args.batch_size,
        steps_per_budget=args.steps_per_budget,
        data_dir=None if args.synthetic else args.data,
        device=args.device,
    )
    serve(config)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: ``tweetsent {stats,train,eval,predict,ablate}``."""
import argparse
import os
import sys

from . import pipeline
from .config import RunConfig, load_config
from .data import load_dataset, stats
from .exceptions import TweetSentError


def _add_common(p, config_required=False):
    p.add_argument("--config", required=config_required, help="key=value run configuration file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="output directory (overrides out_dir)")


def _run_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out_dir = args.out
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(prog="tweetsent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="label distribution per dialect")
    _add_common(p)
    p.add_argument("--data", action="append", default=[], help="dataset TSV (repeatable)")

    p = sub.add_parser("train", help="train a model and write its artifacts")
    _add_common(p, config_required=True)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("eval", help="per-dialect precision/recall/F1")
    _add_common(p)
    p.add_argument("--checkpoint", required=True, help="model directory or its model.ckpt")
    p.add_argument("--data", action="append", required=True, help="labeled dataset TSV")
    p.add_argument("--no-group", action="store_true", help="pool all dialects")

    p = sub.add_parser("predict", help="label tweets")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text", action="append", help="tweet text (repeatable)")
    src.add_argument("--file", help="dataset TSV; labels are ignored")

    p = sub.add_parser("ablate", help="train with and without hashtag segmentation")
    _add_common(p, config_required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "stats":
            paths = args.data
            if not paths and args.config:
                cfg = _run_config(args)
                paths = [p for p in (cfg.train_file, cfg.dev_file) if p]
            records = [r for path in paths for r in load_dataset(path)]
            table = stats(records)
            print(table.to_text(), end="")
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                with open(os.path.join(args.out, "stats.csv"), "w", encoding="utf-8", newline="") as fh:
                    fh.write(table.to_csv())
        elif args.command == "train":
            cfg = _run_config(args)
            clf = pipeline.cmd_train(cfg, verbose=args.verbose)
            h = clf.history_
            print(f"trained {len(h)} epoch(s); best epoch {h.best_epoch}; artifacts in {cfg.out_dir}")
        elif args.command == "eval":
            _, table = pipeline.cmd_eval(args.checkpoint, args.data, not args.no_group, args.out)
            print(table, end="")
        elif args.command == "predict":
            if args.file:
                records = load_dataset(args.file)
                texts, ids = [r.text for r in records], [r.id for r in records]
            else:
                texts, ids = args.text, None
            sys.stdout.write(pipeline.cmd_predict(args.checkpoint, texts, ids))
        elif args.command == "ablate":
            _, table = pipeline.cmd_ablate(_run_config(args))
            print(table, end="")
    except (TweetSentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

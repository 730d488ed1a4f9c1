"""Command-line entry point: ``revrate {stats,prepare,train,evaluate,predict}``.

Log verbosity comes from the ``REVRATE_LOG`` environment variable
(DEBUG, INFO, WARNING; default WARNING). Failures print a single
``error: ...`` line on stderr and exit nonzero.
"""

import argparse
import json
import logging
import os
import sys

from . import pipeline
from .corpus import compute_stats, read_reviews, review_from_record, split
from .evaluation import compare_models, metrics_from_predictions
from .features import FeatureContext, encode_example
from .serialize import load_model, save_model
from .textpipe import Vocabulary, preprocess_review

log = logging.getLogger("revrate")

CHECKPOINT_SCHEMA = 1


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(2)


def _existing_file(path: str) -> str:
    if not os.path.isfile(path):
        raise CliError(f"no such file: {path}")
    return path


def _writable_target(path: str) -> str:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise CliError(f"output directory does not exist: {parent}")
    return path


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read_text(path: str) -> str:
    with open(_existing_file(path), encoding="utf-8") as fh:
        return fh.read()


def _profile(args) -> pipeline.Profile:
    return pipeline.PAPER if args.paper_profile else pipeline.DESK


def cmd_stats(args) -> int:
    _existing_file(args.data)
    if args.csv:
        _writable_target(args.csv)
    stats = compute_stats(read_reviews(args.data))
    sys.stdout.write(stats.to_text())
    if args.csv:
        _write_text(args.csv, stats.to_csv())
    return 0


def cmd_prepare(args) -> int:
    _existing_file(args.data)
    if not os.path.isdir(args.out_dir):
        raise CliError(f"output directory does not exist: {args.out_dir}")
    dataset = split(read_reviews(args.data), args.ratio, args.seed)
    vocab, ctx = pipeline.build_artifacts(dataset.train, _profile(args))
    vocab_path = os.path.join(args.out_dir, "vocab.tsv")
    ctx_path = os.path.join(args.out_dir, "context.txt")
    _write_text(vocab_path, vocab.to_text())
    _write_text(ctx_path, ctx.to_text())
    print(f"vocabulary: {len(vocab)} entries -> {vocab_path}")
    print(f"context: {len(ctx.reviewer_index)} reviewers, {len(ctx.item_index)} items -> {ctx_path}")
    return 0


def _artifact_paths(checkpoint: str) -> tuple:
    return checkpoint + ".vocab.tsv", checkpoint + ".context.txt"


def cmd_train(args) -> int:
    _existing_file(args.data)
    _writable_target(args.out)
    losses = args.losses or os.path.join(os.path.dirname(os.path.abspath(args.out)), "losses.csv")
    if args.model == "dnn":
        _writable_target(losses)
    profile = _profile(args)
    options = pipeline.Options(engineered_counts=args.engineered_counts)
    dataset = split(read_reviews(args.data), args.ratio, args.seed)
    prep = pipeline.prepare(dataset, profile)
    model, curve = pipeline.fit(args.model, prep, profile, args.seed, options, epochs=args.epochs)

    vocab_path, ctx_path = _artifact_paths(args.out)
    _write_text(vocab_path, prep.vocab.to_text())
    _write_text(ctx_path, prep.ctx.to_text())
    meta = {
        "schema": CHECKPOINT_SCHEMA,
        "data_path": os.path.abspath(args.data),
        "ratio": args.ratio,
        "seed": args.seed,
        "profile": profile.name,
        "seq_len": profile.seq_len,
        "epochs": args.epochs or profile.epochs,
        "engineered_counts": args.engineered_counts,
        "vocab_file": os.path.basename(vocab_path),
        "context_file": os.path.basename(ctx_path),
    }
    save_model(args.out, args.model, model, meta)
    print(f"wrote {args.model} checkpoint -> {args.out}")
    if curve is not None:
        _write_text(losses, curve.to_csv())
        print(f"wrote loss curve ({len(curve)} epochs) -> {losses}")
    return 0


def _load_checkpoint(path: str):
    kind, model, meta = load_model(_existing_file(path))
    if kind not in pipeline.MODEL_KINDS:
        raise CliError(f"{path}: unknown model kind {kind!r}")
    base = os.path.dirname(os.path.abspath(path))
    vocab = Vocabulary.from_text(_read_text(os.path.join(base, meta["vocab_file"])))
    ctx = FeatureContext.from_text(_read_text(os.path.join(base, meta["context_file"])))
    return kind, model, meta, vocab, ctx


def cmd_evaluate(args) -> int:
    for path in args.checkpoints:
        _existing_file(path)
    if args.csv:
        _writable_target(args.csv)
    rows = []
    for path in args.checkpoints:
        kind, model, meta, vocab, ctx = _load_checkpoint(path)
        # the split comes from the checkpoint, never from flags
        dataset = split(read_reviews(_existing_file(meta["data_path"])), meta["ratio"], meta["seed"])
        profile = pipeline.PROFILES[meta["profile"]]
        prep = pipeline.prepare(dataset, profile, vocab=vocab, ctx=ctx)
        options = pipeline.Options(engineered_counts=meta["engineered_counts"],
                                   expected_rating=args.expected_rating)
        preds = pipeline.batch_predictor(kind, model, prep, options)(prep.test, prep.test_tokens)
        name = args.names[len(rows)] if args.names and len(rows) < len(args.names) else kind
        rows.append(metrics_from_predictions(name, preds, [e.target for e in prep.test]))
    report = compare_models(rows)
    sys.stdout.write(report.text())
    if args.csv:
        _write_text(args.csv, report.csv())
    return 0


def cmd_predict(args) -> int:
    kind, model, meta, vocab, ctx = _load_checkpoint(args.checkpoint)
    raw = sys.stdin.read().strip()
    if not raw:
        raise CliError("expected one JSON review record on standard input")
    try:
        record = json.loads(raw.splitlines()[0])
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON on standard input ({exc.msg})") from None
    review = review_from_record(record)
    tokens = preprocess_review(review.review_text, review.summary)
    example = encode_example(review, vocab, ctx, meta["seq_len"], tokens=tokens)
    prep = pipeline.Prepared(vocab, ctx, [], [], [], [])
    options = pipeline.Options(engineered_counts=meta["engineered_counts"],
                               expected_rating=args.expected_rating)
    rating = pipeline.batch_predictor(kind, model, prep, options)([example], [tokens])[0]
    print(f"{float(rating):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="revrate", description="Review rating prediction toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def split_flags(sp):
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--ratio", type=float, default=0.7, help="train fraction")
        sp.add_argument("--paper-profile", action="store_true",
                        help="V=10000, L=100, 100 epochs instead of the desk profile")

    sp = sub.add_parser("stats", help="corpus statistics")
    sp.add_argument("data")
    sp.add_argument("--csv", help="also write statistics as CSV")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("prepare", help="build vocabulary and feature context from the train split")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out-dir", required=True)
    split_flags(sp)
    sp.set_defaults(func=cmd_prepare)

    sp = sub.add_parser("train", help="fit a model and write a checkpoint")
    sp.add_argument("--model", required=True, choices=pipeline.MODEL_KINDS)
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--losses", help="loss-curve CSV for dnn (default: losses.csv beside --out)")
    sp.add_argument("--epochs", type=int, help="override the profile's DNN epoch count")
    sp.add_argument("--engineered-counts", action="store_true",
                    help="append reviewer history and product popularity features")
    split_flags(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="score checkpoints on their held-out split")
    sp.add_argument("checkpoints", nargs="+")
    sp.add_argument("--csv", help="also write the report as CSV")
    sp.add_argument("--names", nargs="*", help="row labels, one per checkpoint")
    sp.add_argument("--expected-rating", action="store_true",
                    help="classifiers predict sum p(c)*c instead of the argmax rating")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("predict", help="score one JSON review read from stdin")
    sp.add_argument("checkpoint")
    sp.add_argument("--expected-rating", action="store_true")
    sp.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("REVRATE_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "epochs", None) is not None and args.epochs < 1:
        sys.stderr.write("error: --epochs must be >= 1\n")
        return 2
    try:
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError, IndexError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        sys.stderr.write(f"error: {msg}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: preprocess, build-vocab, train, evaluate, ablate, predict, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, metrics, service, training, vocab as vocab_mod
from .encoders import DEFAULT_REGISTRY, load_registry
from .model import COMPONENT_ORDER, ModelConfig, build_model
from .training import TrainConfig, load_checkpoint


def _cmd_preprocess(args: argparse.Namespace) -> int:
    with open(args.dump, encoding="utf-8") as fh:
        summary = corpus.build_dataset(fh, args.out, limit=args.limit)
    print(
        f"kept={summary.kept} skipped={summary.skipped} "
        f"(non_question={summary.skipped_non_question} "
        f"missing_fields={summary.skipped_missing_fields} "
        f"empty_title={summary.skipped_empty_title} "
        f"too_many_tags={summary.skipped_too_many_tags} "
        f"malformed={summary.malformed})"
    )
    return 0


def _cmd_build_vocab(args: argparse.Namespace) -> int:
    counts = vocab_mod.count_tags(corpus.read_dataset(args.data))
    vocabulary = vocab_mod.build_vocab(counts, args.theta)
    vocab_mod.save_vocab(vocabulary, args.out)
    rare = len(counts) - vocabulary.size
    print(f"common={vocabulary.size} rare={rare} theta={args.theta}")
    return 0


def _load_labeled(data_path: str, vocabulary) -> list:
    pairs = []
    for post in corpus.read_dataset(data_path):
        kept = vocab_mod.filter_post(post, vocabulary)
        if kept is not None:
            pairs.append((kept, vocab_mod.encode_labels(kept.tags, vocabulary)))
    return pairs


def _cmd_train(args: argparse.Namespace) -> int:
    vocabulary = vocab_mod.load_vocab(args.vocab)
    registry = load_registry(args.registry) if args.registry else None
    known = registry or DEFAULT_REGISTRY
    if args.backbone not in known:
        print(f"unknown backbone {args.backbone!r}; known: {sorted(known)}", file=sys.stderr)
        return 1
    hidden = known[args.backbone][0]
    components = tuple(args.components.split(","))
    pairs = _load_labeled(args.data, vocabulary)
    if not pairs:
        print("no trainable posts after rare-tag filtering", file=sys.stderr)
        return 1
    config = ModelConfig(
        components=components,
        backbone_id=args.backbone,
        vocab_size=vocabulary.size,
        hidden_size=hidden,
    )
    model = build_model(config, registry=registry)
    train_config = TrainConfig(
        batch_size=args.batch_size,
        initial_lr=args.lr,
        epochs=args.epochs,
        warmup_steps=args.warmup_steps,
        seed=args.seed,
        device=args.device,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = training.train(
        model,
        pairs,
        train_config,
        out_dir=out_dir,
        vocab=vocabulary,
        log_path=out_dir / "train_log.jsonl",
    )
    print(f"steps={result.steps} final_loss={result.losses[-1]:.4f} digest={result.digest[:12]}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model, vocabulary = load_checkpoint(args.checkpoint)
    if vocabulary is None:
        print("checkpoint has no vocabulary", file=sys.stderr)
        return 1
    posts = [
        kept
        for post in corpus.read_dataset(args.test)
        if (kept := vocab_mod.filter_post(post, vocabulary)) is not None
    ]
    report = metrics.evaluate_corpus(model, vocabulary, posts)
    report.save(args.out)
    print(report.table())
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    variants = args.variants.split(",")
    root = Path(args.checkpoint_root)
    reports: dict[str, metrics.MetricsReport] = {}
    for variant in variants:
        checkpoint = root / variant
        if not checkpoint.is_dir():
            print(f"missing checkpoint for variant {variant!r}: {checkpoint}", file=sys.stderr)
            return 1
        model, vocabulary = load_checkpoint(checkpoint)
        posts = [
            kept
            for post in corpus.read_dataset(args.test)
            if (kept := vocab_mod.filter_post(post, vocabulary)) is not None
        ]
        reports[variant] = metrics.evaluate_corpus(model, vocabulary, posts)
    deltas = metrics.run_ablation(reports, baseline=args.baseline)
    payload = {
        "reports": {name: rep.to_dict() for name, rep in reports.items()},
        "deltas": deltas,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    for name, rep in reports.items():
        print(f"== {name}")
        print(rep.table())
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    model, vocabulary = load_checkpoint(args.checkpoint)
    if vocabulary is None:
        print("checkpoint has no vocabulary", file=sys.stderr)
        return 1
    body = Path(args.body_file).read_text(encoding="utf-8") if args.body_file else ""
    request = service.SuggestRequest(title=args.title, body=body, k=args.k)
    response = service.predict_tags(request, model, vocabulary)
    for tag in response.tags:
        print(f"{tag.name}\t{tag.score:.4f}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    service.serve(
        args.checkpoint,
        bind_address=args.bind,
        max_in_flight=args.max_in_flight,
        cors_origins=args.cors_origin or None,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagforge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="convert a Posts.xml dump into a dataset file")
    p.add_argument("--dump", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("build-vocab", help="count tags and keep the common ones")
    p.add_argument("--data", required=True)
    p.add_argument("--theta", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_vocab)

    p = sub.add_parser("train", help="fine-tune a model on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--backbone", default="codebert-base")
    p.add_argument("--components", default=",".join(COMPONENT_ORDER))
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=7e-5)
    p.add_argument("--epochs", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--warmup-steps", type=int, default=0)
    p.add_argument("--device", default="cpu")
    p.add_argument("--registry", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a test dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ablate", help="compare variant checkpoints on one test set")
    p.add_argument("--variants", default="all,notitle,nodesp,nocode")
    p.add_argument("--checkpoint-root", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--baseline", default="all")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("predict", help="suggest tags for one post")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--title", required=True)
    p.add_argument("--body-file", default=None)
    p.add_argument("-k", type=int, default=5)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("serve", help="run the suggestion HTTP service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--max-in-flight", type=int, default=32)
    p.add_argument("--cors-origin", action="append", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

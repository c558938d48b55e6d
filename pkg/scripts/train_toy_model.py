"""Train a small triplet model on the synthetic corpus and save a checkpoint.

The resulting directory works with every checkpoint consumer:

    python scripts/train_toy_model.py --out /tmp/toy
    tagforge serve --checkpoint /tmp/toy --bind 127.0.0.1:8080
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tagforge.corpus import split_latest
from tagforge.metrics import evaluate_corpus
from tagforge.model import ModelConfig, build_model
from tagforge.synthetic import generate_corpus
from tagforge.training import TrainConfig, set_seed, train
from tagforge.vocab import build_vocab, count_tags, encode_labels


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--n-posts", type=int, default=3000)
    parser.add_argument("--epochs", type=float, default=5.0)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    corpus = generate_corpus(n_posts=args.n_posts, seed=0)
    vocab = build_vocab(count_tags(corpus.posts), 50)
    train_posts, test_posts = split_latest(list(corpus.posts), max(1, args.n_posts // 6))
    pairs = [(p, encode_labels(p.tags, vocab)) for p in train_posts]

    args.out.mkdir(parents=True, exist_ok=True)
    set_seed(args.seed)
    model = build_model(
        ModelConfig(
            components=("title", "description", "code"),
            backbone_id="stub",
            vocab_size=vocab.size,
            hidden_size=16,
        )
    )
    result = train(
        model,
        pairs,
        TrainConfig(batch_size=64, initial_lr=7e-5, epochs=args.epochs, seed=args.seed),
        out_dir=args.out,
        vocab=vocab,
        log_path=args.out / "train_log.jsonl" if args.out else None,
    )
    report = evaluate_corpus(model, vocab, test_posts)
    print(report.table())
    print(f"checkpoint: {args.out} (digest {result.digest[:12]})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

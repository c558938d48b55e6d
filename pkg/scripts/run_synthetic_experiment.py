"""Desk-scale ablation experiment on the synthetic keyword corpus.

Trains the full triplet plus the three twin variants under identical
hyperparameters, evaluates each on the held-out chronological tail, and prints
the per-variant metric tables plus deltas against the triplet baseline.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tagforge.corpus import split_latest
from tagforge.metrics import VARIANT_COMPONENTS, evaluate_corpus, run_ablation
from tagforge.model import ModelConfig, build_model
from tagforge.synthetic import generate_corpus
from tagforge.training import TrainConfig, set_seed, train
from tagforge.vocab import build_vocab, count_tags, encode_labels


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-posts", type=int, default=3000)
    parser.add_argument("--n-test", type=int, default=500)
    parser.add_argument("--epochs", type=float, default=5.0)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--data-seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=None, help="checkpoint root (one subdir per variant)")
    args = parser.parse_args()

    corpus = generate_corpus(n_posts=args.n_posts, seed=args.data_seed)
    vocab = build_vocab(count_tags(corpus.posts), 50)
    train_posts, test_posts = split_latest(list(corpus.posts), args.n_test)
    pairs = [(p, encode_labels(p.tags, vocab)) for p in train_posts]
    print(f"corpus: {len(train_posts)} train / {len(test_posts)} test, L={vocab.size}")

    reports = {}
    for variant, components in VARIANT_COMPONENTS.items():
        set_seed(args.seed)
        model = build_model(
            ModelConfig(
                components=components,
                backbone_id="stub",
                vocab_size=vocab.size,
                hidden_size=16,
            )
        )
        out_dir = args.out / variant if args.out else None
        result = train(
            model,
            pairs,
            TrainConfig(batch_size=64, initial_lr=7e-5, epochs=args.epochs, seed=args.seed),
            out_dir=out_dir,
            vocab=vocab,
        )
        reports[variant] = evaluate_corpus(model, vocab, test_posts)
        print(f"\n== {variant} ({'+'.join(components)}), final loss {result.losses[-1]:.3f}")
        print(reports[variant].table())

    print("\n== deltas vs full triplet (variant - all)")
    deltas = run_ablation(reports, baseline="all")
    for variant, table in deltas.items():
        f1_deltas = "  ".join(f"F1@{k}={table[f'f1@{k}']:+.3f}" for k in range(1, 6))
        print(f"{variant:<8} {f1_deltas}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

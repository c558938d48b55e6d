"""Precision/Recall/F1 at k for ranked tag recommendations."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Post
from .vocab import MAX_K, TagVocabulary, rank_indices

KS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class EvalCase:
    """Ground-truth indices and the model's descending-score ranking."""

    gt: frozenset[int]
    ranked: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.gt) <= MAX_K:
            raise ValueError(f"|GT| must be 1..{MAX_K}, got {len(self.gt)}")
        if len(set(self.ranked)) != len(self.ranked):
            raise ValueError("ranked list has duplicates")
        if len(self.ranked) < MAX_K:
            raise ValueError(f"ranked list shorter than {MAX_K}")


def _check_k(case: EvalCase, k: int) -> None:
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}, got {k}")
    if k > len(case.ranked):
        raise ValueError(f"k={k} exceeds ranked length {len(case.ranked)}")


def hits_at_k(case: EvalCase, k: int) -> int:
    _check_k(case, k)
    return sum(1 for idx in case.ranked[:k] if idx in case.gt)


def precision_at_k(case: EvalCase, k: int) -> float:
    """Fraction of the top-k recommendations that are ground truth."""
    return hits_at_k(case, k) / k


def recall_at_k(case: EvalCase, k: int) -> float:
    """Hits over min(k, |GT|): the usual recall, uncapped when k < |GT|."""
    return hits_at_k(case, k) / min(k, len(case.gt))


def f1_at_k(case: EvalCase, k: int) -> float:
    """Harmonic mean of precision and recall at k; 0 when both vanish."""
    p = precision_at_k(case, k)
    r = recall_at_k(case, k)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


@dataclass(frozen=True)
class MetricsReport:
    precision: dict[int, float]
    recall: dict[int, float]
    f1: dict[int, float]
    n_cases: int
    model_digest: str = "unsaved"

    def __post_init__(self):
        for table in (self.precision, self.recall, self.f1):
            for value in table.values():
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"metric outside [0,1]: {value}")

    def to_dict(self) -> dict:
        out: dict = {}
        for k in sorted(self.precision):
            out[f"precision@{k}"] = self.precision[k]
        for k in sorted(self.recall):
            out[f"recall@{k}"] = self.recall[k]
        for k in sorted(self.f1):
            out[f"f1@{k}"] = self.f1[k]
        out["n_cases"] = self.n_cases
        out["model_digest"] = self.model_digest
        return out

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def table(self) -> str:
        """Fixed-order text table: one metric per row, one column per k."""
        ks = sorted(self.precision)
        lines = ["metric    " + "".join(f"@{k}     " for k in ks)]
        for name, values in (
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
        ):
            cells = "".join(f"{values[k]:.3f}  " for k in ks)
            lines.append(f"{name:<10}{cells}")
        return "\n".join(lines)


def evaluate_cases(
    cases: Sequence[EvalCase],
    ks: Iterable[int] = KS,
    model_digest: str = "unsaved",
) -> MetricsReport:
    """Arithmetic mean of per-case metrics over a corpus."""
    cases = list(cases)
    if not cases:
        raise ValueError("empty evaluation set")
    ks = sorted(ks)
    precision = {k: sum(precision_at_k(c, k) for c in cases) / len(cases) for k in ks}
    recall = {k: sum(recall_at_k(c, k) for c in cases) / len(cases) for k in ks}
    f1 = {k: sum(f1_at_k(c, k) for c in cases) / len(cases) for k in ks}
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        n_cases=len(cases),
        model_digest=model_digest,
    )


def cases_from_model(
    model,
    vocab: TagVocabulary,
    test_posts: Sequence[Post],
    batch_size: int = 64,
) -> list[EvalCase]:
    """Score a test corpus and build one EvalCase per post."""
    if not test_posts:
        raise ValueError("empty test corpus")
    probs = model.predict_batch(test_posts, batch_size=batch_size)
    cases = []
    for post, scores in zip(test_posts, probs):
        gt = frozenset(vocab.index(t) for t in post.tags)
        ranked = tuple(rank_indices(scores, MAX_K))
        cases.append(EvalCase(gt=gt, ranked=ranked))
    return cases


def evaluate_corpus(
    model,
    vocab: TagVocabulary,
    test_posts: Sequence[Post],
    ks: Iterable[int] = KS,
    batch_size: int = 64,
) -> MetricsReport:
    """Top-5 scoring of every test post, averaged into a MetricsReport."""
    cases = cases_from_model(model, vocab, test_posts, batch_size=batch_size)
    return evaluate_cases(cases, ks=ks, model_digest=getattr(model, "digest", "unsaved"))


VARIANT_COMPONENTS = {
    "all": ("title", "description", "code"),
    "notitle": ("description", "code"),
    "nodesp": ("title", "code"),
    "nocode": ("title", "description"),
}


def run_ablation(
    reports: dict[str, MetricsReport],
    baseline: str = "all",
) -> dict[str, dict[str, float]]:
    """Delta table: each variant's metrics minus the full-triplet baseline."""
    if baseline not in reports:
        raise ValueError(f"missing baseline report {baseline!r}")
    base = reports[baseline].to_dict()
    deltas: dict[str, dict[str, float]] = {}
    for variant, report in reports.items():
        if variant == baseline:
            continue
        current = report.to_dict()
        deltas[variant] = {
            key: current[key] - base[key]
            for key in current
            if isinstance(base.get(key), float)
        }
    return deltas

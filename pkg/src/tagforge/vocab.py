"""Tag frequency counting, rare-tag filtering, and label/index conversion."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Post

MAX_K = 5


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class TagVocabulary:
    """Common tags indexed 0..L-1 by descending count, ties by name.

    A tag is rare when its corpus count is below the threshold; rare tags never
    enter the vocabulary.
    """

    threshold: int
    names: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.names:
            raise VocabularyError("empty vocabulary")
        if len(self.names) != len(self.counts):
            raise VocabularyError("names/counts length mismatch")
        if any(c < self.threshold for c in self.counts):
            raise VocabularyError("entry below threshold")

    @property
    def size(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise VocabularyError(f"unknown tag: {name!r}") from None

    @property
    def _index(self) -> dict[str, int]:
        # Lazy reverse map; object.__setattr__ because the dataclass is frozen.
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = {name: i for i, name in enumerate(self.names)}
            object.__setattr__(self, "_index_cache", cached)
        return cached


def count_tags(posts: Iterable[Post]) -> Counter:
    """Exact multiset counts over all posts' tag lists; merge-friendly."""
    counts: Counter = Counter()
    for post in posts:
        counts.update(post.tags)
    return counts


def build_vocab(counts: Mapping[str, int], threshold: int) -> TagVocabulary:
    """Keep tags with count >= threshold, ordered by (-count, name)."""
    if threshold < 1:
        raise VocabularyError(f"threshold must be >= 1, got {threshold}")
    entries = sorted(
        ((name, count) for name, count in counts.items() if count >= threshold),
        key=lambda item: (-item[1], item[0]),
    )
    if not entries:
        raise VocabularyError(f"no tag reaches threshold {threshold}")
    names, tag_counts = zip(*entries)
    return TagVocabulary(threshold=threshold, names=names, counts=tag_counts)


def filter_post(post: Post, vocab: TagVocabulary) -> Optional[Post]:
    """Drop rare tags from a post; None when no tag survives."""
    kept = tuple(t for t in post.tags if t in vocab)
    if not kept:
        return None
    if kept == post.tags:
        return post
    return Post(
        id=post.id,
        created_at=post.created_at,
        title=post.title,
        description=post.description,
        code=post.code,
        tags=kept,
    )


def encode_labels(tags: Sequence[str], vocab: TagVocabulary) -> np.ndarray:
    """Binary label vector of length L; every tag must be in the vocabulary."""
    if not tags:
        raise VocabularyError("a label needs at least one tag")
    bits = np.zeros(vocab.size, dtype=np.float32)
    for tag in tags:
        bits[vocab.index(tag)] = 1.0
    return bits


def rank_indices(scores: Sequence[float], k: int) -> list[int]:
    """Indices of the k largest scores, ties broken by ascending index."""
    order = sorted(range(len(scores)), key=lambda j: (-float(scores[j]), j))
    return order[:k]


def decode_top_k(
    scores: Sequence[float], vocab: TagVocabulary, k: int
) -> list[tuple[str, float]]:
    """The k highest-scoring tags, descending; k is capped at 5 by the task."""
    if not 1 <= k <= MAX_K:
        raise VocabularyError(f"k must be in 1..{MAX_K}, got {k}")
    if len(scores) != vocab.size:
        raise VocabularyError(f"scores length {len(scores)} != L {vocab.size}")
    if k > vocab.size:
        raise VocabularyError(f"k={k} exceeds vocabulary size {vocab.size}")
    return [(vocab.names[j], float(scores[j])) for j in rank_indices(scores, k)]


def save_vocab(vocab: TagVocabulary, path: str | Path) -> None:
    """theta/L header line, then one "index<TAB>name<TAB>count" line per entry."""
    lines = [f"theta={vocab.threshold} L={vocab.size}"]
    for i, (name, count) in enumerate(zip(vocab.names, vocab.counts)):
        lines.append(f"{i}\t{name}\t{count}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vocab(path: str | Path) -> TagVocabulary:
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.split("\n") if line]
    header = lines[0].split()
    if len(header) != 2 or not header[0].startswith("theta="):
        raise VocabularyError(f"bad vocabulary header: {lines[0]!r}")
    threshold = int(header[0].split("=", 1)[1])
    declared = int(header[1].split("=", 1)[1])
    names: list[str] = []
    counts: list[int] = []
    for i, line in enumerate(lines[1:]):
        index, name, count = line.split("\t")
        if int(index) != i:
            raise VocabularyError(f"index gap at line {i + 1}")
        names.append(name)
        counts.append(int(count))
    if declared != len(names):
        raise VocabularyError(f"header L={declared} but {len(names)} entries")
    return TagVocabulary(threshold=threshold, names=tuple(names), counts=tuple(counts))

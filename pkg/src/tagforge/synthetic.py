"""Synthetic keyword-planted corpus: a desk-scale, noise-free learnability probe.

Each tag belongs to one component (title, description, or code) and owns a
unique keyword. A post carries a tag exactly when the tag's keyword appears in
the tag's component, so a model that reads all three components can solve the
task, while an ablated twin is blind to one tag family.

The filler pool is deliberately tiny and keywords repeat within their
component: with H=16 stub embeddings, that keeps an exact linear solution in
reach of a single-digit-step fine-tune at the default learning rate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta

from .corpus import Post
from .model import COMPONENT_ORDER

FILLER_WORDS = ("how", "fix", "error", "when", "run")


@dataclass(frozen=True)
class SyntheticCorpus:
    posts: tuple[Post, ...]
    tag_component: dict[str, str]

    def tags_for(self, component: str) -> tuple[str, ...]:
        return tuple(t for t, c in sorted(self.tag_component.items()) if c == component)


def keyword_for(tag: str) -> str:
    return f"kw{tag.replace('-', '')}"


def generate_corpus(
    n_posts: int = 3000,
    seed: int = 0,
    tags_per_component: int = 10,
    tags_per_post: int = 5,
    keyword_repeats: int = 4,
) -> SyntheticCorpus:
    """Posts whose tag sets are a deterministic function of planted keywords."""
    rng = random.Random(seed)
    tag_component: dict[str, str] = {}
    for component in COMPONENT_ORDER:
        for i in range(tags_per_component):
            tag_component[f"{component[:4]}-topic-{i:02d}"] = component
    all_tags = sorted(tag_component)
    start = datetime(2018, 1, 1)
    posts = []
    for i in range(n_posts):
        tags = sorted(rng.sample(all_tags, tags_per_post))
        texts: dict[str, str] = {}
        for component in COMPONENT_ORDER:
            words = []
            for tag in tags:
                if tag_component[tag] == component:
                    words += [keyword_for(tag)] * keyword_repeats
            words += [rng.choice(FILLER_WORDS) for _ in range(rng.randint(1, 2))]
            rng.shuffle(words)
            joiner = "\n" if component == "code" else " "
            texts[component] = joiner.join(words)
        posts.append(
            Post(
                id=i + 1,
                created_at=(start + timedelta(minutes=i)).isoformat(),
                title=texts["title"],
                description=texts["description"],
                code=texts["code"],
                tags=tuple(tags),
            )
        )
    return SyntheticCorpus(posts=tuple(posts), tag_component=tag_component)

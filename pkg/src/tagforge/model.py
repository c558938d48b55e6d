"""Post representation fusion and the multi-label sigmoid classifier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .corpus import Post
from .encoders import (
    Backbone,
    average_pool,
    collate,
    load_backbone,
    tokenize_component,
)

COMPONENT_ORDER = ("title", "description", "code")
PROB_EPS = 1e-7
HIDDEN_LAYER_WIDTH = 768


@dataclass(frozen=True)
class ModelConfig:
    """Which components feed the classifier, and the shapes that follow."""

    components: tuple[str, ...]
    backbone_id: str
    vocab_size: int
    hidden_size: int
    hidden_layer: bool = False
    dropout: float = 0.0
    share_backbones: bool = False

    def __post_init__(self):
        canonical = tuple(c for c in COMPONENT_ORDER if c in self.components)
        if canonical != self.components or len(set(self.components)) != len(self.components):
            raise ValueError(
                f"components must follow the order {COMPONENT_ORDER}, got {self.components}"
            )
        if len(self.components) not in (2, 3):
            raise ValueError("triplet needs 3 components, twin needs 2")
        if self.vocab_size < 1 or self.hidden_size < 1:
            raise ValueError("vocab_size and hidden_size must be positive")

    @property
    def fused_width(self) -> int:
        return len(self.components) * self.hidden_size

    def to_dict(self) -> dict:
        return {
            "components": list(self.components),
            "backbone_id": self.backbone_id,
            "vocab_size": self.vocab_size,
            "hidden_size": self.hidden_size,
            "hidden_layer": self.hidden_layer,
            "dropout": self.dropout,
            "share_backbones": self.share_backbones,
        }

    @staticmethod
    def from_dict(data: dict) -> "ModelConfig":
        return ModelConfig(
            components=tuple(data["components"]),
            backbone_id=data["backbone_id"],
            vocab_size=data["vocab_size"],
            hidden_size=data["hidden_size"],
            hidden_layer=data.get("hidden_layer", False),
            dropout=data.get("dropout", 0.0),
            share_backbones=data.get("share_backbones", False),
        )


def fuse(embeddings: Sequence[torch.Tensor]) -> torch.Tensor:
    """Concatenate component embeddings in their configured order."""
    if not embeddings:
        raise ValueError("nothing to fuse")
    width = embeddings[0].shape[-1]
    for emb in embeddings[1:]:
        if emb.shape[-1] != width:
            raise ValueError(
                f"component width mismatch: {emb.shape[-1]} != {width}"
            )
    return torch.cat(list(embeddings), dim=-1)


def bce_loss(probs: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy: mean over examples, sum over the label axis."""
    if probs.shape != labels.shape:
        raise ValueError(f"shape mismatch: probs {tuple(probs.shape)}, labels {tuple(labels.shape)}")
    per_example = -(labels * torch.log(probs) + (1 - labels) * torch.log1p(-probs)).sum(dim=-1)
    return per_example.mean()


class TagModel(nn.Module):
    """Component encoders fused by concatenation, then a sigmoid tag head.

    The head output layer starts at zero so every initial probability is 0.5;
    ranking signal then comes entirely from training.
    """

    def __init__(self, config: ModelConfig, backbones: dict[str, Backbone]):
        super().__init__()
        if set(backbones) != set(config.components):
            raise ValueError("backbones must cover exactly the configured components")
        self.config = config
        self.backbones = nn.ModuleDict(backbones)
        self.digest = "unsaved"
        width = config.fused_width
        self.drop = nn.Dropout(config.dropout) if config.dropout > 0 else nn.Identity()
        if config.hidden_layer:
            self.hidden = nn.Linear(width, HIDDEN_LAYER_WIDTH)
            self.head = nn.Linear(HIDDEN_LAYER_WIDTH, config.vocab_size)
        else:
            self.hidden = None
            self.head = nn.Linear(width, config.vocab_size)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def encode_batch(self, posts: Sequence[Post]) -> torch.Tensor:
        """Tokenize, encode, and pool every configured component, then fuse."""
        pooled = []
        dtype = self.head.weight.dtype
        for component in self.config.components:
            backbone = self.backbones[component]
            seqs = [
                tokenize_component(getattr(post, component), backbone)
                for post in posts
            ]
            ids, mask = collate(seqs, backbone.pad_id)
            hidden = backbone(ids, mask).to(dtype)
            pooled.append(average_pool(hidden, mask))
        return fuse(pooled)

    def predict_probabilities(self, rep: torch.Tensor) -> torch.Tensor:
        """Per-tag sigmoid probabilities, clamped away from exact 0 and 1."""
        expected = self.config.fused_width
        if rep.shape[-1] != expected:
            raise ValueError(f"representation width {rep.shape[-1]} != {expected}")
        x = self.drop(rep)
        if self.hidden is not None:
            x = torch.relu(self.hidden(x))
        logits = self.head(x)
        return torch.sigmoid(logits).clamp(PROB_EPS, 1 - PROB_EPS)

    def forward(self, posts: Sequence[Post]) -> torch.Tensor:
        return self.predict_probabilities(self.encode_batch(posts))

    @torch.inference_mode()
    def predict_batch(self, posts: Sequence[Post], batch_size: int = 64) -> np.ndarray:
        """Evaluation-mode probabilities as a (n_posts, L) float array."""
        was_training = self.training
        self.eval()
        try:
            chunks = []
            for start in range(0, len(posts), batch_size):
                probs = self.forward(posts[start : start + batch_size])
                chunks.append(probs.to(torch.float64).cpu().numpy())
            return np.concatenate(chunks, axis=0)
        finally:
            self.train(was_training)


def build_model(
    config: ModelConfig,
    registry: dict[str, tuple[int, str]] | None = None,
    cache_dir: str | None = None,
) -> TagModel:
    """Load one independent backbone per component (or one shared instance)."""
    if config.share_backbones:
        shared = load_backbone(config.backbone_id, registry, cache_dir)
        backbones = {c: shared for c in config.components}
    else:
        backbones = {
            c: load_backbone(config.backbone_id, registry, cache_dir)
            for c in config.components
        }
    first = next(iter(backbones.values()))
    if first.spec.hidden_size != config.hidden_size:
        raise ValueError(
            f"config hidden_size {config.hidden_size} != backbone "
            f"{first.spec.hidden_size}"
        )
    return TagModel(config, backbones)

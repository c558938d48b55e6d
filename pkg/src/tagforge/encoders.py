"""Per-component text encoders: tokenization, backbone registry, average pooling."""

from __future__ import annotations

import os
import re
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

MAX_POSITIONS = 512
MAX_BODY_TOKENS = 510  # positions left after the two special tokens

MODEL_CACHE_ENV = "TAGFORGE_MODEL_CACHE"


class BackboneLoadError(RuntimeError):
    pass


@dataclass(frozen=True)
class BackboneSpec:
    identifier: str
    hidden_size: int
    max_positions: int = MAX_POSITIONS

    def __post_init__(self):
        if self.hidden_size <= 0:
            raise ValueError(f"hidden_size must be positive, got {self.hidden_size}")
        if self.max_positions < 3:
            raise ValueError("max_positions must fit two specials plus one token")


# identifier -> (hidden size, weight location). "builtin:" entries need no
# downloads; the rest resolve through the HuggingFace hub or a local path.
DEFAULT_REGISTRY: dict[str, tuple[int, str]] = {
    "stub": (16, "builtin:stub"),
    "bert-base": (768, "bert-base-uncased"),
    "roberta-base": (768, "roberta-base"),
    "albert-base": (768, "albert-base-v2"),
    "codebert-base": (768, "microsoft/codebert-base"),
    "bertoverflow": (768, "jeniya/BERTOverflow"),
}


def load_registry(path: str | Path) -> dict[str, tuple[int, str]]:
    """Registry file: one "identifier<TAB>hidden_size<TAB>location" line each."""
    registry = dict(DEFAULT_REGISTRY)
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        identifier, hidden, location = line.split("\t")
        registry[identifier] = (int(hidden), location)
    return registry


@dataclass(frozen=True)
class TokenSequence:
    """Token ids framed by begin/end specials; mask marks non-padding positions."""

    ids: tuple[int, ...]
    mask: tuple[int, ...]

    def __post_init__(self):
        if len(self.ids) != len(self.mask):
            raise ValueError("ids/mask length mismatch")
        if len(self.ids) > MAX_POSITIONS:
            raise ValueError(f"sequence longer than {MAX_POSITIONS}")


class Backbone(nn.Module):
    """A loaded encoder: subtoken ids in, per-token hidden states out."""

    spec: BackboneSpec
    bos_id: int
    eos_id: int
    pad_id: int

    def tokenize(self, text: str) -> list[int]:
        raise NotImplementedError

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError


_STUB_SEED = 0x7A67F0  # fixed: two loads must be bit-identical
_STUB_BUCKETS = 4096
_STUB_TOKEN_RE = re.compile(r"[a-z0-9_]+|[^\sa-z0-9_]")
_STUB_GAIN = 128.0


class StubBackbone(Backbone):
    """Offline test encoder: hash-bucketed embeddings plus one mixing layer.

    All parameters derive from a fixed seed, so freshly loaded instances agree
    bit-for-bit. The mixing layer starts near a scaled identity; the gain keeps
    desk-scale fine-tuning logits separable at the default learning rate.
    """

    def __init__(self, spec: BackboneSpec):
        super().__init__()
        self.spec = spec
        self.pad_id = 0
        self.bos_id = 1
        self.eos_id = 2
        gen = torch.Generator().manual_seed(_STUB_SEED)
        embed = torch.randn(_STUB_BUCKETS, spec.hidden_size, generator=gen)
        embed[self.pad_id].zero_()
        self.embedding = nn.Embedding(_STUB_BUCKETS, spec.hidden_size)
        self.embedding.weight.data.copy_(embed)
        h = spec.hidden_size
        noise = torch.randn(h, h, generator=gen) * (0.25 / h**0.5)
        self.mix = nn.Linear(h, h)
        self.mix.weight.data.copy_(_STUB_GAIN * (torch.eye(h) + noise))
        self.mix.bias.data.zero_()

    def tokenize(self, text: str) -> list[int]:
        tokens = _STUB_TOKEN_RE.findall(text.lower())
        span = _STUB_BUCKETS - 3
        return [3 + zlib.crc32(t.encode("utf-8")) % span for t in tokens]

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        del mask  # per-token transform; padding is excluded at pooling
        return self.mix(self.embedding(ids))


class HFBackbone(Backbone):
    """Wrapper around a HuggingFace encoder checkpoint."""

    def __init__(self, spec: BackboneSpec, location: str, cache_dir: str | None):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise BackboneLoadError(
                f"backbone {spec.identifier!r} needs the 'transformers' package"
            ) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(location, cache_dir=cache_dir)
            self.model = AutoModel.from_pretrained(location, cache_dir=cache_dir)
        except Exception as exc:
            raise BackboneLoadError(
                f"cannot load weights for backbone {spec.identifier!r} "
                f"from {location!r}: {exc}"
            ) from exc
        self.spec = spec
        self.bos_id = self.tokenizer.cls_token_id
        self.eos_id = self.tokenizer.sep_token_id
        self.pad_id = self.tokenizer.pad_token_id

    def tokenize(self, text: str) -> list[int]:
        return self.tokenizer.encode(text, add_special_tokens=False)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        return self.model(input_ids=ids, attention_mask=mask).last_hidden_state


def load_backbone(
    identifier: str,
    registry: dict[str, tuple[int, str]] | None = None,
    cache_dir: str | None = None,
) -> Backbone:
    """Instantiate a registry backbone; `stub` needs no weights or network."""
    registry = registry or DEFAULT_REGISTRY
    if identifier not in registry:
        raise BackboneLoadError(
            f"unknown backbone {identifier!r}; known: {sorted(registry)}"
        )
    hidden, location = registry[identifier]
    spec = BackboneSpec(identifier=identifier, hidden_size=hidden)
    if location == "builtin:stub":
        return StubBackbone(spec)
    cache_dir = cache_dir or os.environ.get(MODEL_CACHE_ENV)
    return HFBackbone(spec, location, cache_dir)


def tokenize_component(text: str, backbone: Backbone) -> TokenSequence:
    """Frame subtoken ids with specials, keeping only the first 510 raw ids."""
    raw = backbone.tokenize(text)[:MAX_BODY_TOKENS]
    ids = (backbone.bos_id, *raw, backbone.eos_id)
    return TokenSequence(ids=ids, mask=(1,) * len(ids))


def collate(sequences: Sequence[TokenSequence], pad_id: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Pad a batch to its longest sequence; returns (ids, mask) tensors."""
    if not sequences:
        raise ValueError("empty batch")
    width = max(len(seq.ids) for seq in sequences)
    ids = torch.full((len(sequences), width), pad_id, dtype=torch.long)
    mask = torch.zeros((len(sequences), width), dtype=torch.long)
    for i, seq in enumerate(sequences):
        ids[i, : len(seq.ids)] = torch.tensor(seq.ids, dtype=torch.long)
        mask[i, : len(seq.mask)] = torch.tensor(seq.mask, dtype=torch.long)
    return ids, mask


def average_pool(hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Mean of hidden rows where mask=1: specials count, padding never does.

    The reduction runs in float64 so an item pools identically alone or inside
    a padded batch, then returns in the input dtype.
    """
    if hidden.shape[:-1] != mask.shape:
        raise ValueError(f"shape mismatch: hidden {tuple(hidden.shape)}, mask {tuple(mask.shape)}")
    mask64 = mask.to(torch.float64)
    denom = mask64.sum(dim=-1)
    if bool((denom == 0).any()):
        raise ValueError("all-zero mask: nothing to pool")
    summed = (hidden.to(torch.float64) * mask64.unsqueeze(-1)).sum(dim=-2)
    return (summed / denom.unsqueeze(-1)).to(hidden.dtype)


def encode_component(text: str, backbone: Backbone) -> torch.Tensor:
    """tokenize -> forward -> pool, for a single text in evaluation mode."""
    seq = tokenize_component(text, backbone)
    ids, mask = collate([seq], backbone.pad_id)
    with torch.no_grad():
        hidden = backbone(ids, mask)
        pooled = average_pool(hidden, mask)
    return pooled[0]

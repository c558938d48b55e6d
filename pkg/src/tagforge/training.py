"""End-to-end fine-tuning loop, linear LR decay, seeding, and checkpoints."""

from __future__ import annotations

import hashlib
import json
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from .corpus import Post
from .model import ModelConfig, TagModel, bce_loss, build_model
from .vocab import TagVocabulary, load_vocab, save_vocab

MANIFEST_NAME = "MANIFEST"
TRAIN_STATE_NAME = "training_state.pt"


class CheckpointError(RuntimeError):
    pass


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, post_ids: Sequence[int]):
        super().__init__(f"non-finite loss at step {step}, batch posts {list(post_ids)}")
        self.step = step
        self.post_ids = list(post_ids)


@dataclass
class TrainConfig:
    batch_size: int = 64
    initial_lr: float = 7e-5
    epochs: float = 1.0
    warmup_steps: int = 0
    seed: int = 42
    device: str = "cpu"
    weight_decay: float = 0.01
    max_grad_norm: Optional[float] = 1.0
    amp: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")


@dataclass
class TrainResult:
    losses: list[float] = field(default_factory=list)
    lrs: list[float] = field(default_factory=list)
    steps: int = 0
    checkpoint_dir: Optional[Path] = None
    digest: Optional[str] = None
    log_path: Optional[Path] = None


def set_seed(seed: int) -> None:
    """Seed every random source the trainer touches."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def linear_lr_factor(step: int, total_steps: int, warmup_steps: int = 0) -> float:
    """Linear warmup to 1.0 over warmup_steps, then linear decay to 0 at the end."""
    if total_steps < 1:
        raise ValueError("total_steps must be >= 1")
    if step < warmup_steps:
        return step / max(1, warmup_steps)
    span = max(1, total_steps - warmup_steps)
    return max(0.0, (total_steps - step) / span)


def _epoch_order(n: int, seed: int, epoch: int) -> torch.Tensor:
    gen = torch.Generator().manual_seed(seed * 100003 + epoch)
    return torch.randperm(n, generator=gen)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def save_checkpoint(
    model: TagModel,
    path: str | Path,
    vocab: Optional[TagVocabulary] = None,
) -> str:
    """Write config, per-component backbone weights, head weights, and digests.

    Returns the model digest (sha256 of the MANIFEST content).
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = ["config.json"]
    head_shape = [list(p.shape) for p in (model.head.weight, model.head.bias)]
    (path / "config.json").write_text(
        json.dumps(
            {"format_version": 1, **model.config.to_dict(), "head_shape": head_shape},
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    if model.config.share_backbones:
        shared = model.backbones[model.config.components[0]]
        torch.save(shared.state_dict(), path / "backbone_shared.pt")
        files.append("backbone_shared.pt")
    else:
        for component in model.config.components:
            name = f"backbone_{component}.pt"
            torch.save(model.backbones[component].state_dict(), path / name)
            files.append(name)
    classifier = {"head": model.head.state_dict()}
    if model.hidden is not None:
        classifier["hidden"] = model.hidden.state_dict()
    torch.save(classifier, path / "head.pt")
    files.append("head.pt")
    if vocab is not None:
        save_vocab(vocab, path / "vocab.txt")
        files.append("vocab.txt")
    manifest = "".join(f"{_sha256(path / name)}  {name}\n" for name in sorted(files))
    (path / MANIFEST_NAME).write_text(manifest, encoding="utf-8")
    digest = hashlib.sha256(manifest.encode("utf-8")).hexdigest()
    model.digest = digest
    return digest


def verify_checkpoint(path: str | Path) -> str:
    """Check every digest in the MANIFEST; returns the model digest."""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.exists():
        raise CheckpointError(f"no {MANIFEST_NAME} in {path}")
    manifest = manifest_path.read_text(encoding="utf-8")
    for line in manifest.splitlines():
        recorded, name = line.split("  ", 1)
        target = path / name
        if not target.exists():
            raise CheckpointError(f"checkpoint file missing: {name}")
        actual = _sha256(target)
        if actual != recorded:
            raise CheckpointError(
                f"digest mismatch for {name}: recorded {recorded[:12]}, found {actual[:12]}"
            )
    return hashlib.sha256(manifest.encode("utf-8")).hexdigest()


def load_checkpoint(
    path: str | Path,
    registry: dict[str, tuple[int, str]] | None = None,
    cache_dir: str | None = None,
    vocab: Optional[TagVocabulary] = None,
) -> tuple[TagModel, Optional[TagVocabulary]]:
    """Rebuild the model from a checkpoint directory, verifying digests first."""
    path = Path(path)
    digest = verify_checkpoint(path)
    config_data = json.loads((path / "config.json").read_text(encoding="utf-8"))
    config = ModelConfig.from_dict(config_data)
    if vocab is None and (path / "vocab.txt").exists():
        vocab = load_vocab(path / "vocab.txt")
    if vocab is not None and vocab.size != config.vocab_size:
        raise CheckpointError(
            f"label width mismatch: checkpoint L={config.vocab_size}, vocabulary L={vocab.size}"
        )
    model = build_model(config, registry=registry, cache_dir=cache_dir)
    try:
        if config.share_backbones:
            state = torch.load(path / "backbone_shared.pt", weights_only=True)
            model.backbones[config.components[0]].load_state_dict(state)
        else:
            for component in config.components:
                state = torch.load(path / f"backbone_{component}.pt", weights_only=True)
                model.backbones[component].load_state_dict(state)
        classifier = torch.load(path / "head.pt", weights_only=True)
        model.head.load_state_dict(classifier["head"])
        if model.hidden is not None:
            model.hidden.load_state_dict(classifier["hidden"])
    except (RuntimeError, KeyError, EOFError) as exc:
        raise CheckpointError(f"cannot restore weights from {path}: {exc}") from exc
    model.digest = digest
    model.eval()
    return model, vocab


def train(
    model: TagModel,
    dataset: Sequence[tuple[Post, np.ndarray]],
    config: TrainConfig,
    out_dir: str | Path | None = None,
    vocab: Optional[TagVocabulary] = None,
    log_path: str | Path | None = None,
    resume_from: str | Path | None = None,
    stop_after_steps: int | None = None,
) -> TrainResult:
    """Fine-tune backbones and head jointly; every random source is seeded.

    Step count is ceil(N / batch_size) * epochs. The dataset is shuffled once
    per epoch with a seed-derived order, so reruns are reproducible.
    stop_after_steps interrupts the job early without shortening the schedule;
    a later call with resume_from picks up at the recorded step.
    """
    if not dataset:
        raise ValueError("empty training dataset")
    set_seed(config.seed)
    device = torch.device(config.device)
    model.to(device)
    model.train()
    posts = [pair[0] for pair in dataset]
    labels = torch.from_numpy(np.stack([pair[1] for pair in dataset])).to(
        device=device, dtype=model.head.weight.dtype
    )
    if labels.shape[1] != model.config.vocab_size:
        raise ValueError(
            f"label width {labels.shape[1]} != model L {model.config.vocab_size}"
        )
    n = len(posts)
    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = math.ceil(steps_per_epoch * config.epochs)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=config.initial_lr, weight_decay=config.weight_decay
    )
    start_step = 0
    if resume_from is not None:
        state = torch.load(Path(resume_from) / TRAIN_STATE_NAME, weights_only=False)
        optimizer.load_state_dict(state["optimizer"])
        start_step = state["completed_steps"]

    result = TrainResult()
    log_file = None
    if log_path is not None:
        log_file = open(log_path, "a", encoding="utf-8")
        log_file.write(
            json.dumps(
                {
                    "event": "config",
                    "seed": config.seed,
                    "batch_size": config.batch_size,
                    "initial_lr": config.initial_lr,
                    "epochs": config.epochs,
                    "warmup_steps": config.warmup_steps,
                    "max_grad_norm": config.max_grad_norm,
                    "total_steps": total_steps,
                    "start_step": start_step,
                }
            )
            + "\n"
        )
    end_step = total_steps if stop_after_steps is None else min(total_steps, stop_after_steps)
    order: torch.Tensor | None = None
    try:
        for step in range(start_step, end_step):
            epoch, slot = divmod(step, steps_per_epoch)
            if slot == 0 or order is None:
                order = _epoch_order(n, config.seed, epoch)
            batch_idx = order[
                slot * config.batch_size : (slot + 1) * config.batch_size
            ].tolist()
            batch_posts = [posts[i] for i in batch_idx]
            batch_labels = labels[batch_idx]
            lr = config.initial_lr * linear_lr_factor(
                step, total_steps, config.warmup_steps
            )
            for group in optimizer.param_groups:
                group["lr"] = lr
            started = time.perf_counter()
            with torch.autocast(
                device_type=device.type, enabled=config.amp, dtype=torch.bfloat16
            ):
                probs = model(batch_posts)
                loss = bce_loss(probs, batch_labels)
            if not torch.isfinite(loss):
                raise TrainingDiverged(step, [p.id for p in batch_posts])
            optimizer.zero_grad()
            loss.backward()
            if config.max_grad_norm is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.max_grad_norm)
            optimizer.step()
            elapsed = max(time.perf_counter() - started, 1e-9)
            result.losses.append(float(loss.detach()))
            result.lrs.append(lr)
            result.steps = step + 1
            if log_file is not None:
                log_file.write(
                    json.dumps(
                        {
                            "step": step,
                            "loss": result.losses[-1],
                            "lr": lr,
                            "examples_per_sec": len(batch_posts) / elapsed,
                        }
                    )
                    + "\n"
                )
    finally:
        if log_file is not None:
            log_file.close()
    if end_step == total_steps:
        # Linear schedule lands on zero once the final step has run.
        for group in optimizer.param_groups:
            group["lr"] = config.initial_lr * linear_lr_factor(
                total_steps, total_steps, config.warmup_steps
            )
    model.eval()
    if out_dir is not None:
        out_dir = Path(out_dir)
        result.digest = save_checkpoint(model, out_dir, vocab=vocab)
        torch.save(
            {"optimizer": optimizer.state_dict(), "completed_steps": result.steps},
            out_dir / TRAIN_STATE_NAME,
        )
        result.checkpoint_dir = out_dir
    if log_path is not None:
        result.log_path = Path(log_path)
    return result

"""Inference surfaces: one-shot prediction and the /v1/suggest HTTP endpoint."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import torch
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, field_validator

from .corpus import Post, decode_code, split_body, strip_html
from .model import TagModel
from .training import load_checkpoint
from .vocab import MAX_K, TagVocabulary, decode_top_k

DEFAULT_MAX_IN_FLIGHT = 32


class SuggestRequest(BaseModel):
    title: str = Field(min_length=1)
    body: str = ""
    k: int = Field(default=MAX_K, ge=1, le=MAX_K)

    @field_validator("title")
    @classmethod
    def title_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("title must not be blank")
        return value


class TagScore(BaseModel):
    name: str
    score: float


class SuggestResponse(BaseModel):
    tags: list[TagScore]
    model_digest: str
    latency_ms: float


def body_components(body: str) -> tuple[str, str]:
    """Split request body into (description, code).

    Bodies carrying `<pre><code>` blocks take the dump-HTML path; anything else
    is treated as plain description text.
    """
    if "<pre><code>" in body:
        description_html, code_html = split_body(body)
        return strip_html(description_html), decode_code(code_html)
    return body, ""


def predict_tags(
    request: SuggestRequest, model: TagModel, vocab: TagVocabulary
) -> SuggestResponse:
    """Preprocess, encode, rank, and return the request's top-k tags."""
    started = time.perf_counter()
    description, code = body_components(request.body)
    post = Post(
        id=0,
        created_at="1970-01-01T00:00:00",
        title=request.title.strip(),
        description=description,
        code=code,
        tags=("unused",),
    )
    scores = model.predict_batch([post])[0]
    ranked = decode_top_k(scores, vocab, request.k)
    return SuggestResponse(
        tags=[TagScore(name=name, score=score) for name, score in ranked],
        model_digest=model.digest,
        latency_ms=(time.perf_counter() - started) * 1000.0,
    )


@dataclass
class _Gate:
    """Bounded in-flight counter: overload answers 503 instead of queueing."""

    limit: int

    def __post_init__(self):
        self._lock = threading.Lock()
        self._active = 0

    def enter(self) -> bool:
        with self._lock:
            if self._active >= self.limit:
                return False
            self._active += 1
            return True

    def leave(self) -> None:
        with self._lock:
            self._active -= 1


def create_app(
    model: TagModel,
    vocab: TagVocabulary,
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    cors_origins: Optional[Sequence[str]] = None,
) -> FastAPI:
    model.eval()
    app = FastAPI(title="tagforge", version="0.1.0")
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )
    gate = _Gate(limit=max_in_flight)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "model_digest": model.digest}

    @app.post("/v1/suggest", response_model=SuggestResponse)
    def suggest(request: SuggestRequest) -> SuggestResponse:
        if not gate.enter():
            raise HTTPException(status_code=503, detail="too many in-flight requests")
        try:
            with torch.inference_mode():
                return predict_tags(request, model, vocab)
        finally:
            gate.leave()

    return app


def app_from_checkpoint(
    checkpoint_dir: str | Path,
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    cors_origins: Optional[Sequence[str]] = None,
) -> FastAPI:
    """Load a checkpoint (refusing digest mismatches) and build the app."""
    model, vocab = load_checkpoint(checkpoint_dir)
    if vocab is None:
        raise RuntimeError(f"checkpoint {checkpoint_dir} carries no vocabulary")
    return create_app(model, vocab, max_in_flight=max_in_flight, cors_origins=cors_origins)


def serve(
    checkpoint_dir: str | Path,
    bind_address: str = "127.0.0.1:8080",
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    cors_origins: Optional[Sequence[str]] = None,
) -> None:
    """Run the HTTP service until interrupted."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    app = app_from_checkpoint(
        checkpoint_dir, max_in_flight=max_in_flight, cors_origins=cors_origins
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))

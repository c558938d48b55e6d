"""Stack Overflow dump ingestion: split posts into title / description / code."""

from __future__ import annotations

import html
import json
import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Iterator, Optional

MAX_TAGS = 5

# Code blocks as rendered by the Stack Overflow editor. Inline <code> spans
# (no enclosing <pre>) are prose and stay in the description.
CODE_BLOCK_RE = re.compile(r"<pre><code>([\s\S]*?)</code></pre>")
TAG_GROUP_RE = re.compile(r"<([^<>]+)>")
TAG_FIELD_RE = re.compile(r"(?:<[^<>]+>)*")
WHITESPACE_RE = re.compile(r"\s+")


class RowParseError(ValueError):
    """A dump row that is not well-formed XML. Carries the row offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class TagFieldError(ValueError):
    """Tags attribute with characters outside <...> groups."""


@dataclass(frozen=True)
class RawPost:
    """One question row as stored in the dump, after XML attribute unescaping."""

    id: int
    post_type: int
    creation_date: str
    title: str
    body_html: str
    tag_field: str


@dataclass(frozen=True)
class Post:
    """A cleaned question: plain-text components plus its tag names."""

    id: int
    created_at: str
    title: str
    description: str
    code: str
    tags: tuple[str, ...]


@dataclass
class CorpusSummary:
    rows_seen: int = 0
    kept: int = 0
    skipped_non_question: int = 0
    skipped_missing_fields: int = 0
    skipped_empty_title: int = 0
    skipped_too_many_tags: int = 0
    malformed: int = 0
    malformed_offsets: list[int] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return (
            self.skipped_non_question
            + self.skipped_missing_fields
            + self.skipped_empty_title
            + self.skipped_too_many_tags
            + self.malformed
        )


class _TextExtractor(HTMLParser):
    """Collects character data, dropping element markup.

    convert_charrefs=True (the default) decodes entities exactly once while
    parsing, so "&amp;lt;" comes out as "&lt;" and is not decoded again.
    """

    def __init__(self):
        super().__init__()
        self.chunks: list[str] = []

    def handle_data(self, data: str) -> None:
        self.chunks.append(data)


def parse_dump_row(xml_row: str, offset: int | None = None) -> Optional[RawPost]:
    """Parse one `<row .../>` element; None for rows that are not tagged questions.

    Answers, wiki posts, and rows missing any of Title/Body/Tags are skipped by
    returning None. Malformed XML raises RowParseError.
    """
    stripped = xml_row.strip()
    if not stripped.startswith("<row"):
        raise RowParseError(f"not a <row> element: {stripped[:40]!r}", offset)
    try:
        elem = ET.fromstring(stripped)
    except ET.ParseError as exc:
        raise RowParseError(f"bad row syntax: {exc}", offset) from exc
    attrs = elem.attrib
    if attrs.get("PostTypeId") != "1":
        return None
    title = attrs.get("Title", "")
    body = attrs.get("Body", "")
    tag_field = attrs.get("Tags", "")
    if not title or not body or not tag_field:
        return None
    try:
        post_id = int(attrs["Id"])
        creation = attrs["CreationDate"]
        datetime.fromisoformat(creation)
    except (KeyError, ValueError) as exc:
        raise RowParseError(f"bad Id/CreationDate: {exc}", offset) from exc
    return RawPost(
        id=post_id,
        post_type=1,
        creation_date=creation,
        title=title,
        body_html=body,
        tag_field=tag_field,
    )


def split_body(body_html: str) -> tuple[str, str]:
    """Split a post body into (description_html, code).

    code is every `<pre><code>...</code></pre>` block content joined by a
    single newline in document order; the description is the body with those
    whole blocks removed. Runs on raw HTML, before any entity decoding, so
    literal "&lt;pre&gt;" text cannot fake a block boundary.
    """
    blocks = CODE_BLOCK_RE.findall(body_html)
    description_html = CODE_BLOCK_RE.sub("", body_html)
    return description_html, "\n".join(blocks)


def strip_html(fragment: str) -> str:
    """Drop element markup, decode entities once, collapse whitespace runs."""
    if not fragment:
        return ""
    extractor = _TextExtractor()
    extractor.feed(fragment)
    extractor.close()
    text = "".join(extractor.chunks)
    return WHITESPACE_RE.sub(" ", text).strip()


def decode_code(code_html: str) -> str:
    """Entity-decode extracted code once, preserving all code whitespace."""
    return html.unescape(code_html)


def parse_tags(tag_field: str) -> list[str]:
    """Unwrap "<a><b>" into ["a", "b"], deduplicated in first-occurrence order."""
    if TAG_FIELD_RE.fullmatch(tag_field) is None:
        raise TagFieldError(f"stray characters in tag field: {tag_field!r}")
    return list(dict.fromkeys(TAG_GROUP_RE.findall(tag_field)))


def post_from_raw(raw: RawPost) -> Optional[Post]:
    """Assemble a Post from a raw row; None when the row is dump noise.

    Noise: title empty after trimming, or more than five tags.
    """
    title = raw.title.strip()
    if not title:
        return None
    tags = parse_tags(raw.tag_field)
    if not tags or len(tags) > MAX_TAGS:
        return None
    description_html, code_html = split_body(raw.body_html)
    return Post(
        id=raw.id,
        created_at=raw.creation_date,
        title=title,
        description=strip_html(description_html),
        code=decode_code(code_html),
        tags=tuple(tags),
    )


def validate_post(post: Post) -> None:
    """Raise ValueError on any Post invariant violation."""
    if not post.title.strip():
        raise ValueError(f"post {post.id}: empty title")
    if not (1 <= len(post.tags) <= MAX_TAGS):
        raise ValueError(f"post {post.id}: {len(post.tags)} tags")
    if len(set(post.tags)) != len(post.tags):
        raise ValueError(f"post {post.id}: duplicate tags")
    for tag in post.tags:
        if "<" in tag or ">" in tag:
            raise ValueError(f"post {post.id}: angle bracket in tag {tag!r}")
    datetime.fromisoformat(post.created_at)


def post_to_json_line(post: Post) -> str:
    """Fixed field order and compact separators keep dataset files byte-stable."""
    record = {
        "id": post.id,
        "created_at": post.created_at,
        "title": post.title,
        "description": post.description,
        "code": post.code,
        "tags": list(post.tags),
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def post_from_json_line(line: str) -> Post:
    record = json.loads(line)
    return Post(
        id=record["id"],
        created_at=record["created_at"],
        title=record["title"],
        description=record["description"],
        code=record["code"],
        tags=tuple(record["tags"]),
    )


def build_dataset(
    rows: Iterable[str],
    out_path: str | Path,
    limit: int | None = None,
) -> CorpusSummary:
    """Stream dump rows into a line-oriented dataset sorted by creation date.

    Writes to "<out>.partial" and renames on success: a leftover .partial file
    marks an interrupted build. Wrapper lines (<?xml, <posts>) are ignored.
    """
    out_path = Path(out_path)
    partial = out_path.with_name(out_path.name + ".partial")
    summary = CorpusSummary()
    posts: list[Post] = []
    for offset, row in enumerate(rows):
        stripped = row.strip()
        if not stripped.startswith("<row"):
            continue
        summary.rows_seen += 1
        try:
            raw = parse_dump_row(stripped, offset=offset)
        except RowParseError:
            summary.malformed += 1
            summary.malformed_offsets.append(offset)
            continue
        if raw is None:
            # Distinguish answers from tagless / incomplete questions.
            if 'PostTypeId="1"' in stripped:
                summary.skipped_missing_fields += 1
            else:
                summary.skipped_non_question += 1
            continue
        try:
            post = post_from_raw(raw)
        except TagFieldError:
            summary.malformed += 1
            summary.malformed_offsets.append(offset)
            continue
        if post is None:
            if not raw.title.strip():
                summary.skipped_empty_title += 1
            else:
                summary.skipped_too_many_tags += 1
            continue
        posts.append(post)
        summary.kept += 1
        if limit is not None and summary.kept >= limit:
            break
    posts.sort(key=lambda p: (p.created_at, p.id))
    # Write-then-rename: an aborted run leaves the .partial marker behind.
    with open(partial, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(post_to_json_line(post) + "\n")
    os.replace(partial, out_path)
    return summary


def read_dataset(path: str | Path) -> Iterator[Post]:
    """Yield posts from a dataset file; refuses files from interrupted builds."""
    path = Path(path)
    partial = path.with_name(path.name + ".partial")
    if partial.exists():
        raise RuntimeError(f"incomplete dataset build: {partial} exists")
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield post_from_json_line(line)


def split_latest(posts: list[Post], n_test: int) -> tuple[list[Post], list[Post]]:
    """Chronological split: the n_test latest posts become the test set."""
    ordered = sorted(posts, key=lambda p: (p.created_at, p.id))
    if n_test <= 0 or n_test >= len(ordered):
        raise ValueError(f"n_test={n_test} out of range for {len(ordered)} posts")
    return ordered[:-n_test], ordered[-n_test:]

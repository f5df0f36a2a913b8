"""Corpus loading and code-block stripping for Stack Exchange posts.

Two corpus formats are supported: a JSONL file with one post object per
line, and the ``Posts.xml`` file from the Stack Exchange data dump.
"""
from __future__ import annotations

import html
import json
import logging
import re
import xml.etree.ElementTree as ET
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path

logger = logging.getLogger(__name__)

QUESTION = "question"
ANSWER = "answer"

_CODE_TAGS = {"code", "pre"}
# Tags whose boundaries separate words; everything else is treated as inline.
_BLOCK_TAGS = {
    "p", "div", "br", "hr", "li", "ul", "ol", "dl", "dt", "dd", "blockquote",
    "h1", "h2", "h3", "h4", "h5", "h6", "table", "tr", "td", "th", "img",
    "section", "article", "header", "footer",
} | _CODE_TAGS
_WS = re.compile(r"\s+")


class CorpusError(ValueError):
    """Raised when a corpus file cannot be turned into valid posts."""


@dataclass
class Post:
    id: int
    post_type: str
    score: int
    body_html: str
    creation_date: datetime
    parent_id: int | None = None
    accepted: bool = False
    title: str | None = None
    tags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id <= 0:
            raise CorpusError(f"id must be a positive integer, got {self.id!r}")
        if self.post_type not in (QUESTION, ANSWER):
            raise CorpusError(f"post_type must be 'question' or 'answer', got {self.post_type!r}")
        if self.post_type == ANSWER and self.parent_id is None:
            raise CorpusError(f"answer {self.id} has no parent_id")
        if self.post_type == QUESTION and self.parent_id is not None:
            raise CorpusError(f"question {self.id} must not have a parent_id")
        if self.parent_id is not None and (not isinstance(self.parent_id, int) or self.parent_id <= 0):
            raise CorpusError(f"parent_id must be a positive integer, got {self.parent_id!r}")
        if self.accepted and self.post_type != ANSWER:
            raise CorpusError(f"question {self.id} cannot be accepted")
        if not isinstance(self.score, int) or isinstance(self.score, bool):
            raise CorpusError(f"score must be an integer, got {self.score!r}")
        if not isinstance(self.body_html, str):
            raise CorpusError("body_html must be a string")
        self.tags = [str(t).lower() for t in self.tags]

    @property
    def is_question(self) -> bool:
        return self.post_type == QUESTION

    def to_json(self) -> dict:
        """Serialize to the JSONL corpus schema."""
        return {
            "id": self.id,
            "post_type": self.post_type,
            "parent_id": self.parent_id,
            "accepted": self.accepted,
            "score": self.score,
            "title": self.title,
            "body_html": self.body_html,
            "tags": list(self.tags),
            "creation_date": format_timestamp(self.creation_date),
        }


@dataclass
class StrippedText:
    post_id: int
    text: str
    removed_code_blocks: int = 0
    warnings: list[str] = field(default_factory=list)


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 / data-dump timestamp, assuming UTC when naive."""
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------- loading

_REQUIRED = ("id", "post_type", "score", "body_html", "creation_date")


def _post_from_record(rec: dict, where: str) -> Post:
    if not isinstance(rec, dict):
        raise CorpusError(f"{where}: record is not a JSON object")
    for name in _REQUIRED:
        if name not in rec:
            raise CorpusError(f"{where}: missing field '{name}'")
    try:
        created = parse_timestamp(rec["creation_date"])
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"{where}: field 'creation_date' is not an RFC 3339 timestamp") from exc
    tags = rec.get("tags") or []
    if not isinstance(tags, list):
        raise CorpusError(f"{where}: field 'tags' must be an array")
    try:
        return Post(
            id=rec["id"],
            post_type=rec["post_type"],
            parent_id=rec.get("parent_id"),
            accepted=bool(rec.get("accepted", False)),
            score=rec["score"],
            title=rec.get("title"),
            body_html=rec["body_html"],
            tags=tags,
            creation_date=created,
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from None


def _read_jsonl(path: Path) -> Iterable[tuple[str, Post]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            where = f"line {lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from None
            yield where, _post_from_record(rec, where)


def _dump_tags(raw: str) -> list[str]:
    # Older dumps use "<a><b>", newer ones "|a|b|".
    if not raw:
        return []
    if raw.startswith("<"):
        return re.findall(r"<([^<>]+)>", raw)
    return [t for t in raw.split("|") if t]


def _int_attr(attrs: dict, name: str, where: str, default=None):
    raw = attrs.get(name)
    if not raw:
        if default is None:
            raise CorpusError(f"{where}: missing attribute {name}")
        return default
    try:
        return int(raw)
    except ValueError:
        raise CorpusError(f"{where}: attribute {name} is not an integer ({raw!r})") from None


def _read_sedump(path: Path) -> Iterable[tuple[str, Post]]:
    rows = []
    accepted_ids = set()
    for _, elem in ET.iterparse(path, events=("end",)):
        if elem.tag != "row":
            continue
        attrs = dict(elem.attrib)
        rows.append((len(rows) + 1, attrs))
        if attrs.get("AcceptedAnswerId"):
            accepted_ids.add(_int_attr(attrs, "AcceptedAnswerId", f"row {len(rows)}"))
        elem.clear()
    for rowno, attrs in rows:
        where = f"row {rowno}"
        kind = {"1": QUESTION, "2": ANSWER}.get(attrs.get("PostTypeId", ""))
        if kind is None:
            continue  # wiki, tag excerpts, etc.
        post_id = _int_attr(attrs, "Id", where)
        if "CreationDate" not in attrs:
            raise CorpusError(f"{where}: missing attribute CreationDate")
        rec = {
            "id": post_id,
            "post_type": kind,
            "parent_id": _int_attr(attrs, "ParentId", where, default=0) or None,
            "accepted": kind == ANSWER and post_id in accepted_ids,
            "score": _int_attr(attrs, "Score", where, default=0),
            "title": attrs.get("Title"),
            "body_html": attrs.get("Body", ""),
            "tags": _dump_tags(attrs.get("Tags", "")),
            "creation_date": attrs["CreationDate"],
        }
        yield where, _post_from_record(rec, where)


def load_corpus(path, format: str = "jsonl") -> list[Post]:
    """Load all posts from ``path`` in file order.

    Args:
        path: corpus file.
        format: ``"jsonl"`` or ``"sedump_xml"``.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        CorpusError: on a malformed record or a duplicate post id.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    readers = {"jsonl": _read_jsonl, "sedump_xml": _read_sedump}
    if format not in readers:
        raise ValueError(f"unknown corpus format {format!r}")
    posts, seen = [], set()
    for where, post in readers[format](path):
        if post.id in seen:
            raise CorpusError(f"{where}: duplicate post id {post.id}")
        seen.add(post.id)
        posts.append(post)
    return posts


def write_corpus(posts: Iterable[Post], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(json.dumps(post.to_json(), ensure_ascii=False) + "\n")


# ---------------------------------------------------------- code stripping


class _CodeStripper(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self.depth = 0
        self.removed = 0

    def handle_starttag(self, tag, attrs):
        if tag in _CODE_TAGS:
            if self.depth == 0:
                self.removed += 1
            self.depth += 1
        if tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_endtag(self, tag):
        if tag in _CODE_TAGS and self.depth > 0:
            self.depth -= 1
        if tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_data(self, data):
        if self.depth == 0:
            self.parts.append(data)


def _clean(text: str) -> str:
    # Decoded &lt;/&gt; would reintroduce angle brackets.
    text = text.replace("<", " ").replace(">", " ")
    return _WS.sub(" ", text).strip()


def strip_code(post: Post) -> StrippedText:
    """Remove ``<code>``/``<pre>`` content and all markup from a post body.

    Text inside other tags is kept, entities are decoded, and whitespace
    is collapsed. An unclosed code or pre tag swallows the rest of the body
    and adds a warning instead of failing.
    """
    parser = _CodeStripper()
    parser.feed(post.body_html)
    parser.close()
    warnings = []
    if parser.depth > 0:
        msg = f"post {post.id}: unclosed code/pre tag, dropped text to end of body"
        logger.warning(msg)
        warnings.append(msg)
    return StrippedText(
        post_id=post.id,
        text=_clean("".join(parser.parts)),
        removed_code_blocks=parser.removed,
        warnings=warnings,
    )


def post_text(post: Post, include_titles: bool = True) -> StrippedText:
    """Code-stripped text of a post, with the question title prepended."""
    stripped = strip_code(post)
    if include_titles and post.title:
        title = _clean(html.unescape(post.title))
        if title:
            sep = " " if title[-1] in ".!?" else ". "
            stripped.text = (title + sep + stripped.text).strip()
    return stripped


def questions_of(corpus: Iterable[Post]) -> tuple[dict[int, list[Post]], set[int]]:
    """Group answers under their question.

    Returns:
        ``(groups, orphans)`` where ``groups`` maps every question id to its
        answers in corpus order and ``orphans`` holds the ids of answers whose
        parent question is not in the corpus.
    """
    corpus = list(corpus)
    groups = {p.id: [] for p in corpus if p.is_question}
    orphans = set()
    for post in corpus:
        if post.is_question:
            continue
        if post.parent_id in groups:
            groups[post.parent_id].append(post)
        else:
            orphans.add(post.id)
    if orphans:
        logger.warning("%d answers have no parent question in the corpus", len(orphans))
    return groups, orphans

"""Fetch tagged questions and their answers from the Stack Exchange API.

Responses are cached on disk by request URL (without the API key), so an
interrupted crawl can be resumed without spending quota again. The default
API filter leaves out post bodies, so every request asks for
``filter=withbody``.
"""
from __future__ import annotations

import hashlib
import html
import json
import logging
import os
import time
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlencode

import requests

from .ingest import ANSWER, QUESTION, Post

logger = logging.getLogger(__name__)

API_ROOT = "https://api.stackexchange.com/2.3"
MAX_RETRIES = 5
MAX_IDS_PER_REQUEST = 100


class FetchError(RuntimeError):
    pass


class QuotaError(FetchError):
    pass


@dataclass
class FetchSpec:
    site: str = "stackoverflow"
    tag: str = "android"
    from_date: datetime = datetime(2009, 1, 1, tzinfo=timezone.utc)
    to_date: datetime = datetime(2022, 5, 1, tzinfo=timezone.utc)
    page_size: int = 100
    api_key: str | None = None
    max_pages: int | None = None

    def __post_init__(self):
        if self.from_date >= self.to_date:
            raise ValueError("from_date must be earlier than to_date")
        if not 1 <= self.page_size <= 100:
            raise ValueError("page_size must be in [1, 100]")
        if self.max_pages is not None and self.max_pages < 1:
            raise ValueError("max_pages must be >= 1")
        if self.api_key is None:
            self.api_key = os.environ.get("SE_API_KEY")


def _epoch(dt: datetime) -> int:
    return int(dt.timestamp())


def _from_epoch(value) -> datetime:
    return datetime.fromtimestamp(int(value), tz=timezone.utc)


def question_from_item(item: dict) -> Post:
    return Post(
        id=int(item["question_id"]),
        post_type=QUESTION,
        score=int(item["score"]),
        title=html.unescape(item.get("title", "")) or None,
        body_html=item["body"],
        tags=list(item.get("tags", [])),
        creation_date=_from_epoch(item["creation_date"]),
    )


def answer_from_item(item: dict) -> Post:
    return Post(
        id=int(item["answer_id"]),
        post_type=ANSWER,
        parent_id=int(item["question_id"]),
        accepted=bool(item.get("is_accepted", False)),
        score=int(item["score"]),
        body_html=item["body"],
        creation_date=_from_epoch(item["creation_date"]),
    )


class StackExchangeClient:
    """Paged, quota-aware API client.

    ``sleep`` and ``clock`` are injectable so tests can run against a fake
    clock; ``session`` can be anything with a requests-style ``get``.
    """

    def __init__(self, session=None, cache_dir=None, sleep=time.sleep, clock=time.monotonic, api_root=API_ROOT):
        self.session = session or requests.Session()
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.sleep = sleep
        self.clock = clock
        self.api_root = api_root
        self.not_before = 0.0
        self.waits = 0
        self.requests_made = 0
        self.quota_remaining = None

    def _cache_path(self, url: str) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / (hashlib.sha256(url.encode()).hexdigest() + ".json")

    def _wait_window(self):
        now = self.clock()
        if now < self.not_before:
            self.sleep(self.not_before - now)

    def _get(self, path: str, params: dict, page: int, api_key: str | None) -> dict:
        url = f"{self.api_root}{path}?{urlencode(sorted(params.items()))}"
        cached = self._cache_path(url)
        if cached is not None and cached.exists():
            return json.loads(cached.read_text("utf-8"))

        query = dict(params)
        if api_key:
            query["key"] = api_key
        for attempt in range(MAX_RETRIES + 1):
            self._wait_window()
            resp = self.session.get(f"{self.api_root}{path}", params=query, timeout=60)
            self.requests_made += 1
            throttled = resp.status_code == 429
            payload = None
            if not throttled:
                try:
                    payload = resp.json()
                except ValueError:
                    raise FetchError(f"page {page}: response is not JSON") from None
                throttled = payload.get("error_name") == "throttle_violation"
            if not throttled:
                break
            if attempt == MAX_RETRIES:
                raise QuotaError(f"page {page}: still throttled after {MAX_RETRIES} retries")
            delay = _retry_delay(resp, payload)
            logger.warning("page %d throttled; retrying in %.0fs", page, delay)
            self.not_before = self.clock() + delay
            self.waits += 1

        if resp.status_code >= 400:
            raise FetchError(f"page {page}: HTTP {resp.status_code}: {payload.get('error_message', '')}")
        if not isinstance(payload, dict) or not isinstance(payload.get("items"), list):
            raise FetchError(f"page {page}: malformed payload (no 'items' list)")
        if "backoff" in payload:
            self.not_before = self.clock() + float(payload["backoff"])
            self.waits += 1
        self.quota_remaining = payload.get("quota_remaining", self.quota_remaining)
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            cached.write_text(json.dumps(payload), "utf-8")
        return payload

    def _pages(self, path, params, spec: FetchSpec) -> Iterator[tuple[int, list]]:
        page = 1
        while True:
            payload = self._get(path, {**params, "page": page}, page, spec.api_key)
            logger.info("%s page %d: %d items, quota remaining %s",
                        path, page, len(payload["items"]), self.quota_remaining)
            yield page, payload["items"]
            if not payload.get("has_more") or (spec.max_pages and page >= spec.max_pages):
                return
            page += 1

    def _base_params(self, spec: FetchSpec) -> dict:
        return {
            "site": spec.site,
            "pagesize": spec.page_size,
            "filter": "withbody",
            "order": "asc",
            "sort": "creation",
        }

    def fetch_questions(self, spec: FetchSpec) -> Iterator[Post]:
        params = {
            **self._base_params(spec),
            "tagged": spec.tag,
            "fromdate": _epoch(spec.from_date),
            "todate": _epoch(spec.to_date),
        }
        for page, items in self._pages("/questions", params, spec):
            for item in items:
                try:
                    yield question_from_item(item)
                except (KeyError, TypeError, ValueError) as exc:
                    raise FetchError(f"page {page}: malformed question item ({exc})") from None

    def fetch_answers(self, question_ids: Sequence[int], spec: FetchSpec) -> Iterator[Post]:
        if not question_ids:
            raise ValueError("fetch_answers needs at least one question id")
        ids = list(question_ids)
        for start in range(0, len(ids), MAX_IDS_PER_REQUEST):
            batch = ";".join(str(i) for i in ids[start:start + MAX_IDS_PER_REQUEST])
            for page, items in self._pages(f"/questions/{batch}/answers", self._base_params(spec), spec):
                for item in items:
                    try:
                        yield answer_from_item(item)
                    except (KeyError, TypeError, ValueError) as exc:
                        raise FetchError(f"page {page}: malformed answer item ({exc})") from None


def _retry_delay(resp, payload) -> float:
    if payload and "backoff" in payload:
        return float(payload["backoff"])
    header = getattr(resp, "headers", {}).get("Retry-After")
    try:
        return float(header) if header is not None else 30.0
    except ValueError:
        return 30.0

"""
Fetching from the Stack Exchange API
====================================

The client pages through results, honours ``backoff`` and retries
throttled requests. Here it talks to a stand-in session so nothing goes
over the network; swap in ``requests.Session()`` (the default) and an
``SE_API_KEY`` to crawl for real.
"""

import tempfile

from stacktopics.ingest import load_corpus, write_corpus
from stacktopics.se_client import FetchSpec, StackExchangeClient


class Replay:
    """Serves canned JSON pages in order."""

    def __init__(self, pages):
        self.pages = list(pages)

    def get(self, url, params=None, timeout=None):
        print("GET", url.split("2.3")[1], {k: params[k] for k in ("page", "filter") if k in params})
        page = self.pages.pop(0)

        class R:
            status_code, headers = 200, {}

            def json(self):
                return page
        return R()


questions = [
    {"items": [{"question_id": 7, "score": 3, "title": "Gradle sync fails", "tags": ["android"],
                "creation_date": 1325376000, "body": "<p>Sync fails after the update.</p>"}],
     "has_more": True, "backoff": 2, "quota_remaining": 299},
    {"items": [{"question_id": 8, "score": 0, "title": "Camera preview black", "tags": ["android"],
                "creation_date": 1325462400, "body": "<p>Preview is black.</p>"}],
     "has_more": False, "quota_remaining": 298},
]
answers = [
    {"items": [{"answer_id": 9, "question_id": 7, "score": 4, "is_accepted": True,
                "creation_date": 1325400000, "body": "<p>Bump the plugin version.</p>"}],
     "has_more": False, "quota_remaining": 297},
]

###############################################################################
# A fake clock shows the wait that ``backoff`` forces before page 2.

now = [0.0]
client = StackExchangeClient(
    session=Replay(questions + answers),
    clock=lambda: now[0],
    sleep=lambda s: (print(f"  waiting {s:.0f}s"), now.__setitem__(0, now[0] + s)),
)
spec = FetchSpec(tag="android", page_size=1, api_key=None)
qs = list(client.fetch_questions(spec))
ans = list(client.fetch_answers([q.id for q in qs], spec))
print("waits:", client.waits, " quota left:", client.quota_remaining)

###############################################################################
# Fetched posts are ordinary corpus records.

path = tempfile.mktemp(suffix=".jsonl")
write_corpus(qs + ans, path)
for p in load_corpus(path):
    print(p.id, p.post_type, p.parent_id, p.accepted, p.title)

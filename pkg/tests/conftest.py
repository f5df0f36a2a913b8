import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from stacktopics.ingest import ANSWER, QUESTION, Post

FIXTURES = Path(__file__).parent / "fixtures"
T0 = datetime(2012, 1, 1, tzinfo=timezone.utc)


def question(pid, body="<p>x</p>", score=0, title="t", **kw):
    return Post(id=pid, post_type=QUESTION, score=score, body_html=body, title=title,
                creation_date=T0, **kw)


def answer(pid, parent, body="<p>x</p>", score=0, accepted=False):
    return Post(id=pid, post_type=ANSWER, parent_id=parent, score=score, body_html=body,
                accepted=accepted, creation_date=T0)


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), "utf-8")
    return path


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])

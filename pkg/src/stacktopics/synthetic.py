"""Seeded synthetic corpora with known structure.

Used by the demos and the test-suite: planted-topic corpora whose generating
labels act as ground truth, and a small Android-flavoured sample corpus.
"""
from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .ingest import ANSWER, QUESTION, Post
from .porter import stem
from .prep import load_stopwords

_EPOCH = datetime(2015, 1, 1, tzinfo=timezone.utc)
_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aiou"


def pseudo_vocabularies(n_groups: int, size: int, seed: int = 0) -> list[list[str]]:
    """Disjoint vocabularies of made-up words with pairwise-distinct stems."""
    rng = np.random.default_rng(seed)
    stops = load_stopwords()
    seen_words, seen_stems = set(), set()
    groups = []
    for _ in range(n_groups):
        words = []
        while len(words) < size:
            n_syl = int(rng.integers(2, 4))
            w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(n_syl))
            w += rng.choice(list(_CONSONANTS))
            s = stem(w)
            if w in seen_words or s in seen_stems or s in stops or w in stops:
                continue
            seen_words.add(w)
            seen_stems.add(s)
            words.append(w)
        groups.append(words)
    return groups


def _sentence(rng, vocab, n_words):
    return " ".join(rng.choice(vocab, size=n_words))


def _html_body(rng, vocab, n_sentences, code=False):
    sentences = [_sentence(rng, vocab, int(rng.integers(6, 11))) for _ in range(n_sentences)]
    body = "<p>" + ". ".join(sentences) + ".</p>"
    if code:
        body += "<pre><code>int x = foo(bar);\nreturn x;</code></pre>"
    return body


def planted_corpus(
    n_groups: int = 3,
    per_group: int = 100,
    vocab_size: int = 50,
    n_noise: int = 30,
    seed: int = 0,
) -> tuple[list[Post], dict[int, int]]:
    """Questions drawn from disjoint vocabularies, plus mixed-vocabulary noise.

    Returns the posts and a map ``post_id -> generating group`` (-1 for noise).
    """
    rng = np.random.default_rng(seed)
    vocabs = pseudo_vocabularies(n_groups, vocab_size, seed)
    mixed = [w for v in vocabs for w in v]
    specs = [(g, vocabs[g]) for g in range(n_groups) for _ in range(per_group)]
    specs += [(-1, mixed)] * n_noise
    order = rng.permutation(len(specs))
    posts, labels = [], {}
    for pid, i in enumerate(order, 1):
        group, vocab = specs[i]
        posts.append(Post(
            id=pid,
            post_type=QUESTION,
            score=int(rng.integers(0, 5)),
            title=_sentence(rng, vocab, 6),
            body_html=_html_body(rng, vocab, int(rng.integers(2, 5)), code=bool(rng.random() < 0.3)),
            tags=["android"],
            creation_date=_EPOCH + timedelta(hours=pid),
        ))
        labels[pid] = group
    return posts, labels


def planted_qa_corpus(
    n_groups: int = 3, per_group: int = 30, vocab_size: int = 50, seed: int = 0
) -> tuple[list[Post], dict[int, int], dict[int, int]]:
    """Planted questions where each question has exactly one qualifying answer.

    Every question gets one accepted answer scoring 5 and two unaccepted
    answers scoring 0, so the corpus mean answer score is 5/3 and only the
    accepted answer passes the answer filter.

    Returns ``(posts, group_of_question, qualifying_answer_of_question)``.
    """
    rng = np.random.default_rng(seed)
    questions, labels = planted_corpus(n_groups, per_group, vocab_size, n_noise=0, seed=seed)
    vocabs = pseudo_vocabularies(n_groups, vocab_size, seed)
    posts = list(questions)
    next_id = len(questions) + 1
    good = {}
    for q in questions:
        vocab = vocabs[labels[q.id]]
        for j, (score, accepted) in enumerate(((5, True), (0, False), (0, False))):
            posts.append(Post(
                id=next_id,
                post_type=ANSWER,
                parent_id=q.id,
                accepted=accepted,
                score=score,
                body_html=_html_body(rng, vocab, int(rng.integers(2, 4))),
                creation_date=q.creation_date + timedelta(minutes=10 * (j + 1)),
            ))
            if accepted:
                good[q.id] = next_id
            next_id += 1
    return posts, labels, good


# ------------------------------------------------- Android sample corpus

_THEMES = {
    "gradle": {
        "nouns": ["gradle", "build", "dependency", "library", "plugin", "project", "module",
                  "proguard", "sdk", "emulator", "studio", "classpath", "jar", "aar", "kotlin"],
        "problems": [
            "my {a} fails to sync after I updated the {b}",
            "the {a} cannot resolve the {b} in android studio",
            "I get a duplicate {a} error when I add the {b}",
            "jenkins tries to launch the {a} instead of the {b}",
            "after migrating to androidx the {a} does not find the {b}",
        ],
        "fixes": [
            "update the {a} version in the top level build file and clean the {b}",
            "it is an issue with the {a} not working with the new {b} package",
            "exclude the duplicated {a} from the {b} declaration and rebuild",
            "invalidate caches and restart, then the {a} resolves the {b} again",
        ],
    },
    "list": {
        "nouns": ["recyclerview", "adapter", "viewholder", "item", "listview", "scroll",
                  "layout", "row", "fragment", "viewpager", "click", "listener", "position"],
        "problems": [
            "the {a} does not update when I change the {b}",
            "clicking an {a} inside the {b} triggers the wrong item",
            "my {a} is too slow because the {b} inflates every row",
            "I want to listen for the {a} event on each {b} in the list",
            "the {a} jumps back to the top when the {b} reloads",
        ],
        "fixes": [
            "register the {a} once when the {b} is created instead of on every bind",
            "call notify item changed on the {a} after you modify the {b}",
            "use diff util so the {a} only redraws the changed {b}",
            "set stable ids on the {a} so the {b} keeps its scroll state",
        ],
    },
    "bluetooth": {
        "nouns": ["bluetooth", "device", "connection", "socket", "ble", "gatt", "pairing",
                  "scan", "permission", "usb", "wifi", "characteristic", "service"],
        "problems": [
            "the {a} drops the {b} after a few seconds",
            "my app cannot discover the {a} during the {b}",
            "reading a {a} from the {b} always returns null",
            "the {a} fails with a timeout when the {b} is busy",
            "android twelve refuses the {a} even though I request the {b}",
        ],
        "fixes": [
            "request the runtime {a} before starting the {b}",
            "close the old {a} before opening a new {b} connection",
            "wait for the {a} callback before you write to the {b}",
            "queue every {a} operation because the {b} handles one at a time",
        ],
    },
    "camera": {
        "nouns": ["camera", "image", "bitmap", "gallery", "picture", "preview", "photo",
                  "orientation", "memory", "picasso", "glide", "thumbnail", "crop"],
        "problems": [
            "the {a} is rotated after I load it into the {b}",
            "loading a large {a} into the {b} throws out of memory",
            "the {a} shows a black screen instead of the {b}",
            "I cannot save the {a} from the {b} to external storage",
            "the {a} looks stretched when the {b} changes size",
        ],
        "fixes": [
            "read the exif {a} and rotate the {b} before displaying it",
            "decode the {a} with a sample size so the {b} fits in memory",
            "let glide load the {a} so it caches and scales the {b}",
            "use the media store api to insert the {a} into the {b}",
        ],
    },
}


_CLOSERS = [
    "it still fails.",
    "nothing changed. Any help is appreciated!",
    "the same thing happens on every device.",
    "it only works on the emulator.",
]


def _fill(rng, template, nouns, pair=None):
    a, b = pair if pair is not None else rng.choice(nouns, size=2, replace=False)
    return template.format(a=a, b=b)


def _context(rng, nouns, frame):
    a, b, c, d = rng.choice(nouns, size=4, replace=False)
    return frame.format(a=a, b=b, c=c, d=d)


def sample_android_corpus(seed: int = 7, n_questions: int = 100, answers_per_question: int = 3) -> list[Post]:
    """A 400-post (by default) corpus of Android-style questions and answers."""
    rng = np.random.default_rng(seed)
    themes = sorted(_THEMES)
    posts = []
    next_id = 1000
    for qi in range(n_questions):
        theme = _THEMES[themes[qi % len(themes)]]
        nouns = theme["nouns"]
        title = _fill(rng, rng.choice(theme["problems"]), nouns).capitalize()
        pair = tuple(rng.choice(nouns, size=2, replace=False))
        sentences = [_fill(rng, rng.choice(theme["problems"]), nouns, pair)]
        if rng.random() < 0.5:
            sentences.append(_fill(rng, rng.choice(theme["problems"]), nouns))
        sentences.append(_context(rng, nouns, "my project uses the {a} with the {b}, the {c} and the {d}"))
        body = "<p>" + ". ".join(s.capitalize() for s in sentences) + ".</p>"
        if rng.random() < 0.5:
            body += f"<pre><code>{rng.choice(nouns)}.init(context);\n// TODO</code></pre>"
        if rng.random() < 0.3:
            body += f"<p>I tried <code>{rng.choice(nouns)}()</code> but {rng.choice(_CLOSERS)}</p>"
        qid = next_id
        next_id += 1
        created = _EPOCH + timedelta(hours=qi * 7)
        posts.append(Post(
            id=qid, post_type=QUESTION, score=int(rng.integers(-1, 12)), title=title,
            body_html=body, tags=["android", themes[qi % len(themes)]], creation_date=created,
        ))
        n_answers = answers_per_question
        accepted_at = int(rng.integers(0, n_answers)) if rng.random() < 0.6 else -1
        for j in range(n_answers):
            fix = _fill(rng, rng.choice(theme["fixes"]), nouns, pair)
            extra = _context(rng, nouns, "check how the {a} talks to the {b}, the {c} and the {d}")
            other = _fill(rng, rng.choice(theme["fixes"]), nouns)
            ans = f"<p>{fix.capitalize()}. {other.capitalize()}. {extra.capitalize()}.</p>"
            if rng.random() < 0.4:
                ans += "<pre><code>android {\n  compileSdk 33\n}</code></pre><p>That worked for me.</p>"
            posts.append(Post(
                id=next_id, post_type=ANSWER, parent_id=qid, accepted=(j == accepted_at),
                score=int(rng.integers(-2, 8)), body_html=ans,
                creation_date=created + timedelta(minutes=30 * (j + 1)),
            ))
            next_id += 1
    return posts

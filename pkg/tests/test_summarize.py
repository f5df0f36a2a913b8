import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacktopics.ingest import post_text
from stacktopics.prep import normalize
from stacktopics.summarize import (
    AnswerFilterPolicy,
    CorpusIndex,
    SummaryConfig,
    answer_threshold,
    centrality,
    filter_answers,
    greedy_select,
    problems_and_solutions,
    score_sentences,
    summarize_question_answers,
    summarize_topic_questions,
)
from stacktopics.topic_model import Topic
from stacktopics.vector_space import EmbedderSpec, embed_sentences

from conftest import answer, question
from oracles import cosine, exhaustive_greedy_reference

SPEC = EmbedderSpec(dimension=256, seed=0)


def index_of(posts):
    docs = [normalize(post_text(p)) for p in posts]
    return CorpusIndex.build(posts, docs, SPEC)


def topic_of(ids, tid=1):
    return Topic(tid, len(ids), "x", ["x"], list(ids), np.zeros(4))


def assert_extractive(summary, index):
    for item in summary.items:
        assert item.text in index.docs[item.post_id].text


# ------------------------------------------------------------------ scoring

def test_score_examples():
    assert list(score_sentences(["gradle build fails"] * 3, SPEC)) == pytest.approx([1, 1, 1])
    assert list(score_sentences(["gradle build fails"], SPEC)) == pytest.approx([1])
    assert list(score_sentences(["the of and"], SPEC)) == [-1]
    with pytest.raises(ValueError):
        score_sentences([], SPEC)


SENTENCES = [
    "gradle build fails after updating the android plugin",
    "the emulator does not start from android studio",
    "recyclerview adapter does not refresh the list",
    "bluetooth socket connection drops after a minute",
    "camera preview is rotated on samsung devices",
    "gradle sync fails with a duplicate class error",
    "the list jumps to the top after notify data set changed",
    "proguard removes classes needed by the gradle plugin",
    "bitmap decoding throws out of memory on large images",
    "the android studio build is very slow",
    "bluetooth scan finds no devices on android twelve",
    "the recyclerview scroll position resets on rotation",
    "gradle cannot resolve the kotlin plugin dependency",
    "picasso does not load images from the gallery",
    "the emulator shows a black screen in android studio",
    "gatt characteristic read returns null",
    "adapter click listener fires for the wrong item",
    "the build fails because the sdk version is missing",
    "camera intent returns a null photo uri",
    "gradle build fails only on the ci server",
]


def test_scores_match_independent_cosine():
    vectors = embed_sentences(SENTENCES, SPEC)
    ours = score_sentences(SENTENCES, SPEC)
    rows = [[float(x) for x in v] for v in vectors]
    centroid = [sum(col) / len(rows) for col in zip(*rows)]
    ref = [cosine(r, centroid) if any(r) else -1.0 for r in rows]
    np.testing.assert_allclose(ours, ref, atol=1e-9)
    assert list(np.argsort(-ours, kind="stable")) == sorted(range(20), key=lambda i: (-ref[i], i))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4), min_size=1, max_size=12))
def test_centrality_range(rows):
    scores = centrality(np.array(rows))
    assert np.all(scores >= -1) and np.all(scores <= 1)


# ---------------------------------------------------------------- selection

def _instance(rng, n):
    base = rng.normal(size=(max(1, n // 2), 6))
    rows = []
    for _ in range(n):
        v = base[rng.integers(len(base))].copy()
        if rng.random() < 0.5:
            v = v + rng.normal(0, 1.0, size=6)  # far from a duplicate
        rows.append(v)
    vectors = np.array(rows)
    scores = np.round(rng.uniform(-1, 1, size=n), 2)  # coarse, so ties occur
    keys = [(int(rng.integers(0, 3)), int(rng.integers(1, 5))) for _ in range(n)]
    return scores, vectors, keys


@pytest.mark.parametrize("seed", range(15))
def test_greedy_equals_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 25))
    k = int(rng.integers(1, 4))
    scores, vectors, keys = _instance(rng, n)
    ours = greedy_select(scores, vectors, k, 0.95, keys)
    ref = exhaustive_greedy_reference(list(scores), vectors.tolist(), k, 0.95, keys)
    assert ours == ref


def test_redundant_sentence_skipped():
    v = np.array([[1.0, 0], [1.0, 0.01], [0, 1.0]])
    assert greedy_select([0.9, 0.8, 0.1], v, 2, 0.95) == [0, 2]


# ------------------------------------------------------- topic summaries

def _small_corpus():
    posts = [
        question(1, "<p>Gradle build fails after the plugin update. The emulator is fine.</p>", title="Gradle fails"),
        question(2, "<p>Gradle build fails on the ci server. Nothing else changed here.</p>", title="CI gradle"),
        question(3, "<p>The camera preview is rotated on my phone.</p>", title="Camera rotated"),
        answer(10, 1, "<p>Update the gradle plugin version in the root build file.</p>", score=5, accepted=True),
        answer(11, 1, "<p>Clean the project and rebuild everything again.</p>", score=0),
        answer(12, 2, "<p>Use the same gradle wrapper on the ci machine.</p>", score=3),
        answer(13, 3, "<p>Read the exif orientation first.</p>", score=-1),
    ]
    return posts, index_of(posts)


def test_topic_summary_uses_questions_only():
    posts, index = _small_corpus()
    s = summarize_topic_questions(topic_of([1, 2, 10, 11]), index, SummaryConfig(), k=3)
    assert 1 <= len(s.items) <= 3
    assert all(it.post_id in (1, 2) for it in s.items)
    scores = [it.score for it in s.items]
    assert scores == sorted(scores, reverse=True)
    assert_extractive(s, index)


def test_topic_with_single_sentence():
    posts = [question(1, "<p>camera preview is rotated</p>", title=None), question(2, "<p>other thing here</p>")]
    index = index_of(posts)
    s = summarize_topic_questions(topic_of([1]), index, k=3)
    assert [it.text for it in s.items] == ["camera preview is rotated"]


def test_topic_without_questions_warns():
    posts, index = _small_corpus()
    s = summarize_topic_questions(topic_of([10, 11]), index)
    assert s.items == [] and s.warnings


def test_pool_cap_is_seeded():
    posts = [question(i, f"<p>sentence number {'abcdefghij'[i % 10]} about gradle builds</p>", title=None)
             for i in range(1, 41)]
    index = index_of(posts)
    cfg = SummaryConfig(max_pool=10, seed=4)
    a = summarize_topic_questions(topic_of(range(1, 41)), index, cfg)
    b = summarize_topic_questions(topic_of(range(1, 41)), index, cfg)
    assert a == b and len(a.items) >= 1


# ------------------------------------------------------------ answer filter

def test_threshold_examples():
    assert answer_threshold([answer(i + 2, 1, score=s) for i, s in enumerate([0, 1, 2, 4])]) == 1.75
    assert answer_threshold([answer(2, 1, score=5)]) == 5
    assert answer_threshold([question(1), answer(2, 1, score=3), answer(3, 1, score=3)]) == 3
    with pytest.raises(ValueError):
        answer_threshold([question(1)])


def test_filter_examples():
    policy = AnswerFilterPolicy(global_mean=1.33)
    a1, a2, a3 = answer(1, 9, score=0, accepted=True), answer(2, 9, score=3), answer(3, 9, score=1)
    assert filter_answers([a1, a2, a3], policy) == [a1, a2]
    assert filter_answers([answer(4, 9, score=-3, accepted=True)], policy)[0].id == 4
    assert filter_answers([answer(5, 9, score=2)], AnswerFilterPolicy(global_mean=2.0)) == []
    same = [answer(i, 9, score=2) for i in range(1, 4)]
    assert filter_answers(same, AnswerFilterPolicy.from_corpus(same)) == []


def test_explicit_threshold_override():
    policy = AnswerFilterPolicy(global_mean=0.5, explicit_threshold=3)
    assert policy.threshold == 3.0
    assert [a.id for a in filter_answers([answer(1, 9, score=3), answer(2, 9, score=4)], policy)] == [2]
    with pytest.raises(ValueError):
        AnswerFilterPolicy(global_mean=0, explicit_threshold=-1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 10), st.booleans()), max_size=15),
       st.floats(-5, 10), st.floats(0, 5))
def test_filter_monotone(spec, low, delta):
    answers = [answer(i + 1, 99, score=s, accepted=a) for i, (s, a) in enumerate(spec)]
    loose = {a.id for a in filter_answers(answers, AnswerFilterPolicy(global_mean=low))}
    strict = {a.id for a in filter_answers(answers, AnswerFilterPolicy(global_mean=low + delta))}
    assert strict <= loose
    assert {a.id for a in answers if a.accepted} <= strict


# -------------------------------------------------------- answer summaries

def test_answer_summary_is_argmax():
    posts = [
        question(1, "<p>Why does the build fail?</p>"),
        answer(2, 1, "<p>Update the gradle plugin now. Then sync the gradle project files. "
                     "Also clear the gradle cache folder.</p>", score=9),
        answer(3, 1, "<p>Restart the gradle daemon process. Check the kotlin version too.</p>", score=9),
    ]
    index = index_of(posts)
    s = summarize_question_answers(1, index, AnswerFilterPolicy(global_mean=0), k=1)
    pool = [(sent, pid) for pid in (2, 3) for sent in index.docs[pid].sentences()]
    assert len(pool) == 5
    scores = score_sentences([p[0] for p in pool], SPEC, index.embedder)
    best = max(range(5), key=lambda i: (scores[i], -i))
    assert [(it.text, it.post_id) for it in s.items] == [pool[best]]
    assert_extractive(s, index)


def test_answer_summary_errors():
    posts, index = _small_corpus()
    with pytest.raises(KeyError):
        summarize_question_answers(999, index, AnswerFilterPolicy(global_mean=0))
    with pytest.raises(KeyError):
        summarize_question_answers(10, index, AnswerFilterPolicy(global_mean=0))
    s = summarize_question_answers(3, index, AnswerFilterPolicy(global_mean=2))
    assert s.items == [] and s.warnings


def test_problems_paired_with_their_answers():
    posts, index = _small_corpus()
    policy = AnswerFilterPolicy.from_corpus(posts)
    pairs = problems_and_solutions(topic_of([1, 2]), index, policy)
    assert pairs
    for ps in pairs:
        for item in ps.solutions.items:
            assert index.posts[item.post_id].parent_id == ps.question_id
        assert_extractive(ps.solutions, index)
    assert problems_and_solutions(topic_of([10]), index, policy) == []

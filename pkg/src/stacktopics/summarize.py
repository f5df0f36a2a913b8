"""Extractive summaries of topic questions and of the answers to a question.

Sentences are embedded against the corpus df table and scored by their
cosine similarity to the pool centroid. The summary takes the best-scoring
sentences greedily, skipping any that is a near-duplicate of one already
taken.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .ingest import Post, questions_of
from .prep import CleanDocument
from .topic_model import Topic
from .vector_space import EmbedderSpec, HashedTfidf, embed_sentences, fit_embedder

logger = logging.getLogger(__name__)

TOPIC_QUESTIONS = "topic_questions"
QUESTION_ANSWERS = "question_answers"
ACCEPTED_OR_ABOVE_MEAN = "accepted_or_above_mean"


@dataclass
class SummaryItem:
    text: str
    post_id: int
    score: float


@dataclass
class Summary:
    subject: str
    subject_id: int
    items: list[SummaryItem]
    k: int
    warnings: list[str] = field(default_factory=list)


@dataclass
class AnswerFilterPolicy:
    global_mean: float
    explicit_threshold: int | None = None
    mode: str = ACCEPTED_OR_ABOVE_MEAN

    def __post_init__(self):
        if self.mode != ACCEPTED_OR_ABOVE_MEAN:
            raise ValueError(f"unknown answer filter mode {self.mode!r}")
        if self.explicit_threshold is not None and self.explicit_threshold < 0:
            raise ValueError("explicit_threshold must be >= 0")

    @classmethod
    def from_corpus(cls, corpus: Iterable[Post], explicit_threshold: int | None = None):
        return cls(global_mean=answer_threshold(corpus), explicit_threshold=explicit_threshold)

    @property
    def threshold(self) -> float:
        if self.explicit_threshold is not None:
            return float(self.explicit_threshold)
        return self.global_mean


@dataclass
class SummaryConfig:
    k_questions: int = 3
    k_answers: int = 1
    redundancy_cos: float = 0.95
    max_pool: int = 2000
    seed: int = 0


@dataclass
class CorpusIndex:
    """Everything the summarizers look up: posts, documents, answer groups."""

    posts: dict[int, Post]
    docs: dict[int, CleanDocument]
    answers: dict[int, list[Post]]
    embedder: HashedTfidf
    spec: EmbedderSpec

    @classmethod
    def build(cls, posts: Sequence[Post], docs: Sequence[CleanDocument], spec: EmbedderSpec | None = None):
        spec = spec or EmbedderSpec()
        answers, _ = questions_of(posts)
        return cls(
            posts={p.id: p for p in posts},
            docs={d.post_id: d for d in docs},
            answers=answers,
            embedder=fit_embedder(docs, spec),
            spec=spec,
        )


# ------------------------------------------------------------- scoring


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)


def centrality(vectors: np.ndarray) -> np.ndarray:
    """Cosine of each row with the mean row; zero rows score -1."""
    vectors = np.asarray(vectors, dtype=np.float64)
    centroid = vectors.mean(axis=0)
    cnorm = np.linalg.norm(centroid)
    norms = np.linalg.norm(vectors, axis=1)
    scores = np.full(len(vectors), -1.0)
    ok = norms > 0
    if cnorm > 0:
        scores[ok] = (vectors[ok] @ centroid) / (norms[ok] * cnorm)
    return np.clip(scores, -1.0, 1.0)


def score_sentences(sentences: Sequence[str], spec: EmbedderSpec, embedder: HashedTfidf | None = None) -> np.ndarray:
    if not sentences:
        raise ValueError("score_sentences needs at least one sentence")
    return centrality(embed_sentences(sentences, spec, embedder))


def greedy_select(
    scores: Sequence[float],
    vectors: np.ndarray,
    k: int,
    redundancy_cos: float,
    order_keys: Sequence[tuple] | None = None,
) -> list[int]:
    """Indices of up to ``k`` sentences, best first.

    Candidates are visited by descending score (then by ``order_keys``,
    then by index) and skipped when their cosine with an already chosen
    sentence exceeds ``redundancy_cos``.
    """
    n = len(scores)
    keys = order_keys or [()] * n
    ranking = sorted(range(n), key=lambda i: (-scores[i], *keys[i], i))
    unit = _unit_rows(vectors)
    chosen: list[int] = []
    for i in ranking:
        if len(chosen) >= k:
            break
        if chosen and np.max(unit[chosen] @ unit[i]) > redundancy_cos:
            continue
        chosen.append(i)
    return chosen


@dataclass
class _Candidate:
    text: str
    post_id: int
    position: int


def _candidates(post_ids: Iterable[int], docs: dict[int, CleanDocument]) -> list[_Candidate]:
    pool = []
    for pid in post_ids:
        doc = docs.get(pid)
        if doc is None:
            continue
        pool.extend(_Candidate(s, pid, pos) for pos, s in enumerate(doc.sentences()))
    return pool


def _summarize_pool(pool, subject, subject_id, k, index: CorpusIndex, cfg: SummaryConfig) -> Summary:
    if len(pool) > cfg.max_pool:
        rng = np.random.default_rng(cfg.seed)
        keep = np.sort(rng.choice(len(pool), size=cfg.max_pool, replace=False))
        pool = [pool[i] for i in keep]
    vectors = embed_sentences([c.text for c in pool], index.spec, index.embedder)
    scores = centrality(vectors)
    picked = greedy_select(
        scores, vectors, k, cfg.redundancy_cos,
        order_keys=[(c.position, c.post_id) for c in pool],
    )
    items = [SummaryItem(pool[i].text, pool[i].post_id, float(scores[i])) for i in picked]
    return Summary(subject, subject_id, items, k)


def summarize_topic_questions(
    topic: Topic, index: CorpusIndex, cfg: SummaryConfig | None = None, k: int | None = None
) -> Summary:
    """The ``k`` most central problem sentences among a topic's questions.

    Answers that ended up in the topic are ignored.
    """
    cfg = cfg or SummaryConfig()
    k = cfg.k_questions if k is None else k
    questions = [pid for pid in topic.member_ids if pid in index.posts and index.posts[pid].is_question]
    pool = _candidates(questions, index.docs)
    if not pool:
        msg = f"topic {topic.topic_id}: no question sentences to summarize"
        logger.warning(msg)
        return Summary(TOPIC_QUESTIONS, topic.topic_id, [], k, [msg])
    return _summarize_pool(pool, TOPIC_QUESTIONS, topic.topic_id, k, index, cfg)


def answer_threshold(corpus: Iterable[Post]) -> float:
    """Mean score over every answer in the corpus."""
    scores = [p.score for p in corpus if not p.is_question]
    if not scores:
        raise ValueError("corpus contains no answers")
    return sum(scores) / len(scores)


def filter_answers(answers: Iterable[Post], policy: AnswerFilterPolicy) -> list[Post]:
    """Keep accepted answers and answers scoring strictly above the threshold."""
    limit = policy.threshold
    return [a for a in answers if a.accepted or a.score > limit]


def summarize_question_answers(
    question_id: int,
    index: CorpusIndex,
    policy: AnswerFilterPolicy,
    cfg: SummaryConfig | None = None,
    k: int | None = None,
) -> Summary:
    cfg = cfg or SummaryConfig()
    k = cfg.k_answers if k is None else k
    post = index.posts.get(question_id)
    if post is None or not post.is_question:
        raise KeyError(f"question {question_id} is not in the corpus")
    kept = filter_answers(index.answers.get(question_id, []), policy)
    pool = _candidates((a.id for a in kept), index.docs)
    if not pool:
        msg = f"question {question_id}: no answers pass the filter"
        logger.warning(msg)
        return Summary(QUESTION_ANSWERS, question_id, [], k, [msg])
    return _summarize_pool(pool, QUESTION_ANSWERS, question_id, k, index, cfg)


@dataclass
class ProblemSolution:
    problem: SummaryItem
    solutions: Summary

    @property
    def question_id(self) -> int:
        return self.problem.post_id


def problems_and_solutions(
    topic: Topic,
    index: CorpusIndex,
    policy: AnswerFilterPolicy,
    cfg: SummaryConfig | None = None,
    question_summary: Summary | None = None,
) -> list[ProblemSolution]:
    """Pair every problem sentence of a topic with a summary of its answers."""
    cfg = cfg or SummaryConfig()
    if question_summary is None:
        question_summary = summarize_topic_questions(topic, index, cfg)
    return [
        ProblemSolution(item, summarize_question_answers(item.post_id, index, policy, cfg))
        for item in question_summary.items
    ]


def question_summaries_json(summaries: Sequence[Summary]) -> list[dict]:
    return [
        {
            "topic_id": s.subject_id,
            "items": [{"text": it.text, "question_id": it.post_id, "score": it.score} for it in s.items],
        }
        for s in summaries
    ]


def answer_summaries_json(reports: Sequence[tuple[int, list[ProblemSolution]]]) -> list[dict]:
    return [
        {
            "topic_id": topic_id,
            "problems": [
                {
                    "text": ps.problem.text,
                    "question_id": ps.question_id,
                    "solutions": [
                        {"text": it.text, "answer_id": it.post_id, "score": it.score}
                        for it in ps.solutions.items
                    ],
                }
                for ps in pairs
            ],
        }
        for topic_id, pairs in reports
    ]

"""
Problems and their solutions
============================

Each planted question gets three answers: one accepted with score 5 and
two with score 0. The corpus-wide mean answer score is 5/3, so only the
accepted answer passes the filter, and every solution sentence must come
from it.
"""

import numpy as np

from stacktopics.ingest import post_text
from stacktopics.prep import normalize
from stacktopics.summarize import (
    AnswerFilterPolicy,
    CorpusIndex,
    SummaryConfig,
    answer_threshold,
    problems_and_solutions,
)
from stacktopics.synthetic import planted_qa_corpus
from stacktopics.topic_model import Topic
from stacktopics.vector_space import EmbedderSpec

posts, group_of, good_answer = planted_qa_corpus(n_groups=2, per_group=10, seed=4)
docs = [normalize(post_text(p)) for p in posts]
index = CorpusIndex.build(posts, docs, EmbedderSpec(seed=4))

print("mean answer score:", answer_threshold(posts))
policy = AnswerFilterPolicy.from_corpus(posts)

###############################################################################
# Instead of clustering we hand the summarizer the planted group directly.

members = [p.id for p in posts if p.is_question and group_of[p.id] == 0]
topic = Topic(1, len(members), "group_zero", [], members, np.zeros(1))

pairs = problems_and_solutions(topic, index, policy, SummaryConfig(k_questions=3, k_answers=1))
for ps in pairs:
    sol = ps.solutions.items[0]
    ok = sol.post_id == good_answer[ps.question_id]
    print(f"q{ps.question_id}: {ps.problem.text[:50]}...")
    print(f"   a{sol.post_id} ({'accepted answer' if ok else 'WRONG'}): {sol.text[:50]}...")

###############################################################################
# Raising the threshold can only remove answers; accepted ones always stay.

strict = AnswerFilterPolicy(global_mean=policy.global_mean, explicit_threshold=10)
print(strict.threshold, [len(index.answers[q]) for q in members[:3]])

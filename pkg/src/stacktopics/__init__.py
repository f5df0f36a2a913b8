"""Topic modeling and extractive summarization of Stack Exchange Q&A corpora."""

__version__ = "0.1.0"

from .cluster import ClusterParams, Clustering, cluster_documents
from .ingest import Post, StrippedText, load_corpus, post_text, questions_of, strip_code
from .prep import CleanDocument, normalize, split_sentences, stem
from .summarize import (
    AnswerFilterPolicy,
    CorpusIndex,
    Summary,
    filter_answers,
    problems_and_solutions,
    summarize_question_answers,
    summarize_topic_questions,
)
from .topic_model import Topic, build_topics, ctfidf, intertopic_map, topic_report
from .vector_space import DocVector, EmbedderSpec, embed_corpus, embed_sentences, map_coordinates, reduce

__all__ = [
    "AnswerFilterPolicy",
    "CleanDocument",
    "ClusterParams",
    "Clustering",
    "CorpusIndex",
    "DocVector",
    "EmbedderSpec",
    "Post",
    "StrippedText",
    "Summary",
    "Topic",
    "build_topics",
    "cluster_documents",
    "ctfidf",
    "embed_corpus",
    "embed_sentences",
    "filter_answers",
    "intertopic_map",
    "load_corpus",
    "map_coordinates",
    "normalize",
    "post_text",
    "problems_and_solutions",
    "questions_of",
    "reduce",
    "split_sentences",
    "stem",
    "strip_code",
    "summarize_question_answers",
    "summarize_topic_questions",
    "topic_report",
]

"""
Recovering planted topics
=========================

Three groups of questions are written from disjoint made-up vocabularies,
plus a few documents that mix all three. The pipeline does not see the
group labels; we use them afterwards to check how pure each topic is.
"""

from collections import Counter

import numpy as np

from stacktopics.cluster import ClusterParams, cluster_documents
from stacktopics.ingest import post_text
from stacktopics.prep import normalize
from stacktopics.synthetic import planted_corpus
from stacktopics.topic_model import build_topics, topic_report
from stacktopics.vector_space import EmbedderSpec, embed_corpus

posts, truth = planted_corpus(n_groups=3, per_group=100, n_noise=30, seed=0)
print(len(posts), "questions; first title:", posts[0].title)

###############################################################################
# Strip code, normalize and stem. ``text`` keeps stop words for the
# summarizer, ``tokens`` are what topic modeling sees.

docs = [normalize(post_text(p)) for p in posts]
print(docs[0].tokens[:8])

###############################################################################
# Hashed TF-IDF vectors, 256 dimensions, unit length.

vectors = embed_corpus(docs, EmbedderSpec(dimension=256, seed=0))
full = np.stack([v.full for v in vectors])
print("vector matrix", full.shape, "norms", np.round(np.linalg.norm(full, axis=1)[:3], 6))

###############################################################################
# Density clustering. Points that belong to no dense region get label -1.

clustering = cluster_documents(vectors, ClusterParams(min_cluster_size=15))
print("clusters:", clustering.n_clusters, " outliers:", clustering.n_outliers)

###############################################################################
# Topics are ranked by size and named after their top c-TF-IDF terms.

topics = build_topics(clustering, docs, vectors)
print(topic_report(topics, top_n=3).to_text())

for t in topics:
    groups = Counter(truth[pid] for pid in t.member_ids)
    group, hits = groups.most_common(1)[0]
    print(f"topic {t.topic_id}: {hits}/{t.count} from group {group}  (purity {hits / t.count:.2f})")

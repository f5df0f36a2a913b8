"""Topics from clusters: class-based TF-IDF terms, ranking, reports, maps."""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .cluster import Clustering
from .prep import CleanDocument
from .vector_space import DocVector, map_coordinates

logger = logging.getLogger(__name__)

N_TERMS = 10
N_NAME_TERMS = 4


@dataclass
class Topic:
    topic_id: int
    count: int
    name: str
    representation: list[str]
    member_ids: list[int]
    centroid: np.ndarray
    scores: list[float] = field(default_factory=list)
    map_xy: tuple[float, float] | None = None

    def to_json(self) -> dict:
        return {
            "topic_id": self.topic_id,
            "count": self.count,
            "name": self.name,
            "representation": list(self.representation),
            "scores": [float(s) for s in self.scores],
            "member_ids": list(self.member_ids),
            "centroid": [float(x) for x in self.centroid],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Topic":
        return cls(
            topic_id=obj["topic_id"],
            count=obj["count"],
            name=obj["name"],
            representation=list(obj["representation"]),
            member_ids=list(obj["member_ids"]),
            centroid=np.asarray(obj["centroid"], dtype=np.float64),
            scores=list(obj.get("scores", [])),
        )


def ctfidf(clusters: Mapping[int, Sequence[CleanDocument]]) -> dict[int, dict[str, float]]:
    """Class-based TF-IDF over clusters of documents.

    All documents of a cluster are concatenated into one class document and
    each term is scored ``tf(t, c) * ln(1 + A / f(t))``, where ``A`` is the
    mean number of tokens per class and ``f(t)`` the frequency of ``t`` over
    all classes. The outlier label -1 is ignored.
    """
    tf = {label: Counter(t for doc in docs for t in doc.tokens)
          for label, docs in sorted(clusters.items()) if label != -1}
    if not tf:
        raise ValueError("ctfidf needs at least one non-outlier cluster")
    for label, counts in tf.items():
        if not counts:
            logger.warning("cluster %d has no tokens; its term map is empty", label)
    total = Counter()
    for counts in tf.values():
        total.update(counts)
    avg = sum(total.values()) / len(tf)
    return {
        label: {t: n * math.log(1.0 + avg / total[t]) for t, n in counts.items()}
        for label, counts in tf.items()
    }


def top_terms(scores: Mapping[str, float], n: int = N_TERMS) -> list[tuple[str, float]]:
    """Highest-scoring terms, ties broken alphabetically."""
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


def build_topics(
    clustering: Clustering,
    docs: Sequence[CleanDocument],
    vectors: Sequence[DocVector],
) -> list[Topic]:
    """Rank clusters by size and describe each one by its top c-TF-IDF terms.

    ``docs`` and ``vectors`` must be aligned with ``clustering.labels``.
    Topic ids are 1-based ranks; equal counts are ordered by the smaller
    minimum member post id.
    """
    labels = np.asarray(clustering.labels)
    if not (len(labels) == len(docs) == len(vectors)):
        raise ValueError("clustering, docs and vectors must be aligned")
    groups: dict[int, list[int]] = {}
    for i, label in enumerate(labels):
        if label >= 0:
            groups.setdefault(int(label), []).append(i)
    if not groups:
        logger.warning("no clusters found; topic list is empty")
        return []

    scores = ctfidf({label: [docs[i] for i in idx] for label, idx in groups.items()})
    order = sorted(groups, key=lambda g: (-len(groups[g]), min(docs[i].post_id for i in groups[g])))
    topics = []
    for rank, label in enumerate(order, 1):
        idx = groups[label]
        terms = top_terms(scores[label])
        representation = [t for t, _ in terms]
        topics.append(Topic(
            topic_id=rank,
            count=len(idx),
            name="_".join(representation[:N_NAME_TERMS]),
            representation=representation,
            member_ids=[docs[i].post_id for i in idx],
            centroid=np.mean(np.stack([vectors[i].full for i in idx]).astype(np.float64), axis=0),
            scores=[s for _, s in terms],
        ))
    return topics


@dataclass
class TopicReport:
    rows: list[tuple[int, int, str, list[str]]]
    coverage: float
    clustered_docs: int

    def to_text(self) -> str:
        lines = [f"{'Topic':>5}  {'Count':>6}  {'Name':<40}  Representation"]
        for tid, count, name, rep in self.rows:
            lines.append(f"{tid:>5}  {count:>6}  {name:<40}  {', '.join(rep)}")
        lines.append(f"coverage of clustered documents by these {len(self.rows)} topics: {self.coverage:.1%}")
        return "\n".join(lines)


def topic_report(topics: Sequence[Topic], top_n: int) -> TopicReport:
    """The ``top_n`` largest topics and the share of clustered docs they hold."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    chosen = list(topics)[:top_n]
    clustered = sum(t.count for t in topics)
    covered = sum(t.count for t in chosen)
    return TopicReport(
        rows=[(t.topic_id, t.count, t.name, list(t.representation)) for t in chosen],
        coverage=covered / clustered if clustered else 0.0,
        clustered_docs=clustered,
    )


def topics_csv(topics: Sequence[Topic]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["topic_id", "count", "name", "representation"])
    for t in topics:
        writer.writerow([t.topic_id, t.count, t.name, ";".join(t.representation)])
    return buf.getvalue()


# ------------------------------------------------------------------- map

_MAX_RADIUS = 0.08


def intertopic_map(topics: Sequence[Topic], seed: int) -> list[dict]:
    """2-D map points ``{topic_id, x, y, r}`` with ``r`` proportional to sqrt(count).

    Also stores the coordinates on each topic's ``map_xy``.
    """
    if not topics:
        raise ValueError("intertopic_map needs at least one topic")
    xy = map_coordinates([t.centroid for t in topics], seed)
    biggest = max(t.count for t in topics)
    points = []
    for t, (x, y) in zip(topics, xy):
        t.map_xy = (float(x), float(y))
        points.append({
            "topic_id": t.topic_id,
            "x": float(x),
            "y": float(y),
            "r": _MAX_RADIUS * math.sqrt(t.count / biggest),
        })
    return points


def map_svg(points: Sequence[dict], size: int = 600) -> str:
    """Render map points as a standalone SVG document."""
    pad = _MAX_RADIUS * size
    scale = size - 2 * pad
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    # Largest circles first so small topics stay visible on top.
    for p in sorted(points, key=lambda p: (-p["r"], p["topic_id"])):
        cx = pad + p["x"] * scale
        cy = pad + (1.0 - p["y"]) * scale
        r = max(p["r"] * size, 2.0)
        out.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
            f'fill="steelblue" fill-opacity="0.35" stroke="steelblue"/>'
        )
        out.append(
            f'<text x="{cx:.2f}" y="{cy:.2f}" font-size="11" text-anchor="middle" '
            f'dominant-baseline="central">{p["topic_id"]}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"

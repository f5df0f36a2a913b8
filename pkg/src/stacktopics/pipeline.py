"""End-to-end pipeline stages with persisted intermediate artifacts.

Stages and the files they produce under ``out_dir``:

=========  ==========================================================
ingest     documents.jsonl
topics     vectors.embd, clustering.json, topics.json, topics.csv
map        map.json, map.svg
summarize  question_summaries.json, answer_summaries.json
run        all of the above plus run_manifest.json
=========  ==========================================================
"""
from __future__ import annotations

import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .cluster import ClusterParams, Clustering, cluster_documents
from .ingest import ANSWER, QUESTION, CorpusError, Post, load_corpus, parse_timestamp, post_text, questions_of
from .prep import CleanDocument, load_stopwords, normalize
from .summarize import (
    AnswerFilterPolicy,
    CorpusIndex,
    SummaryConfig,
    answer_summaries_json,
    problems_and_solutions,
    question_summaries_json,
    summarize_topic_questions,
)
from .topic_model import Topic, build_topics, intertopic_map, map_svg, topic_report, topics_csv
from .vector_space import DocVector, EmbedderSpec, embed_corpus, read_embeddings, reduce, write_embeddings

logger = logging.getLogger(__name__)

DOCUMENTS = "documents.jsonl"
VECTORS = "vectors.embd"
CLUSTERING = "clustering.json"
TOPICS_JSON = "topics.json"
TOPICS_CSV = "topics.csv"
MAP_JSON = "map.json"
MAP_SVG = "map.svg"
QUESTION_SUMMARIES = "question_summaries.json"
ANSWER_SUMMARIES = "answer_summaries.json"
MANIFEST = "run_manifest.json"

ARTIFACTS = (
    DOCUMENTS, VECTORS, CLUSTERING, TOPICS_JSON, TOPICS_CSV,
    MAP_JSON, MAP_SVG, QUESTION_SUMMARIES, ANSWER_SUMMARIES, MANIFEST,
)


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class MissingInputError(StageError):
    """A stage input is missing; names the subcommand that produces it."""

    def __init__(self, stage: str, path: Path, producer: str):
        super().__init__(stage, f"{path} not found; run `{producer}` first")
        self.producer = producer


@dataclass
class PipelineConfig:
    corpus_path: str | None = None
    format: str = "jsonl"
    include_titles: bool = True
    stopwords_path: str | None = None
    embedder: EmbedderSpec = field(default_factory=EmbedderSpec)
    reduce_dim: int = 0
    cluster: ClusterParams = field(default_factory=ClusterParams)
    top_n: int = 80
    k_questions: int = 3
    k_answers: int = 1
    redundancy_cos: float = 0.95
    max_pool: int = 2000
    answer_threshold: int | None = None
    seed: int = 0
    out_dir: str = "out"
    jobs: int = 1

    def __post_init__(self):
        if self.format not in ("jsonl", "sedump_xml"):
            raise ConfigError(f"unknown corpus format {self.format!r}")
        if self.reduce_dim < 0:
            raise ConfigError("reduce_dim must be >= 0 (0 clusters the full vectors)")
        if self.top_n < 1 or self.k_questions < 1 or self.k_answers < 1:
            raise ConfigError("top_n, k_questions and k_answers must be >= 1")
        if not -1.0 <= self.redundancy_cos <= 1.0:
            raise ConfigError("redundancy_cos must lie in [-1, 1]")
        if self.max_pool < 1 or self.jobs < 1:
            raise ConfigError("max_pool and jobs must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        raw = dict(raw)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "seed" not in raw:
            raise ConfigError("config must set 'seed'")
        try:
            emb = dict(raw.pop("embedder", {}) or {})
            emb.setdefault("seed", raw["seed"])
            cl = raw.pop("cluster", {}) or {}
            return cls(embedder=EmbedderSpec(**emb), cluster=ClusterParams(**cl), **raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        raw.update(overrides or {})
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def summary_config(self) -> SummaryConfig:
        return SummaryConfig(
            k_questions=self.k_questions,
            k_answers=self.k_answers,
            redundancy_cos=self.redundancy_cos,
            max_pool=self.max_pool,
            seed=self.seed,
        )


# ------------------------------------------------------------ file I/O


def dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_json(path: Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _require(path: Path, stage: str, producer: str) -> Path:
    if not path.exists():
        raise MissingInputError(stage, path, producer)
    return path


@dataclass
class DocumentRecord:
    """One line of ``documents.jsonl``: a clean document plus post metadata."""

    post: Post
    doc: CleanDocument
    removed_code_blocks: int = 0

    def to_json(self) -> dict:
        p = self.post
        return {
            "post_id": p.id,
            "post_type": p.post_type,
            "parent_id": p.parent_id,
            "accepted": p.accepted,
            "score": p.score,
            "creation_date": p.to_json()["creation_date"],
            "removed_code_blocks": self.removed_code_blocks,
            "text": self.doc.text,
            "tokens": self.doc.tokens,
            "sentence_spans": [list(s) for s in self.doc.sentence_spans],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DocumentRecord":
        post = Post(
            id=obj["post_id"], post_type=obj["post_type"], parent_id=obj["parent_id"],
            accepted=obj["accepted"], score=obj["score"], body_html="",
            creation_date=parse_timestamp(obj["creation_date"]),
        )
        doc = CleanDocument(
            post_id=obj["post_id"], text=obj["text"], tokens=list(obj["tokens"]),
            sentence_spans=[tuple(s) for s in obj["sentence_spans"]],
        )
        return cls(post, doc, obj.get("removed_code_blocks", 0))


def write_documents(records, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def read_documents(path: Path) -> list[DocumentRecord]:
    with open(path, encoding="utf-8") as fh:
        return [DocumentRecord.from_json(json.loads(line)) for line in fh if line.strip()]


# -------------------------------------------------------------- stages


@dataclass
class RunState:
    """Counters and warnings accumulated across stages for the manifest."""

    warnings: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)


def ingest_stage(cfg: PipelineConfig, state: RunState | None = None) -> list[DocumentRecord]:
    state = state or RunState()
    if not cfg.corpus_path:
        raise ConfigError("no corpus_path configured")
    try:
        posts = load_corpus(cfg.corpus_path, cfg.format)
    except CorpusError as exc:
        raise StageError("ingest", str(exc)) from None
    stopwords = load_stopwords(cfg.stopwords_path)
    records = []
    for post in posts:
        stripped = post_text(post, cfg.include_titles)
        state.warnings.extend(stripped.warnings)
        records.append(DocumentRecord(post, normalize(stripped, stopwords), stripped.removed_code_blocks))
    _, orphans = questions_of(posts)
    if orphans:
        state.warnings.append(f"{len(orphans)} answers reference questions missing from the corpus")
    state.stats.update(
        total_posts=len(posts),
        questions=sum(p.post_type == QUESTION for p in posts),
        answers=sum(p.post_type == ANSWER for p in posts),
        orphan_answers=len(orphans),
        empty_after_strip=sum(r.doc.empty for r in records),
    )
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_documents(records, out / DOCUMENTS)
    return records


def topics_stage(cfg: PipelineConfig, state: RunState | None = None, records=None):
    state = state or RunState()
    out = Path(cfg.out_dir)
    if records is None:
        records = read_documents(_require(out / DOCUMENTS, "topics", "ingest"))
    if not records:
        raise StageError("topics", "corpus is empty")
    docs = [r.doc for r in records]
    try:
        vectors = embed_corpus(docs, cfg.embedder)
    except (ValueError, FileNotFoundError) as exc:
        raise StageError("topics", str(exc)) from None
    write_embeddings(out / VECTORS, vectors)
    if cfg.reduce_dim > 0 and len(vectors) >= 2:
        vectors = reduce(vectors, cfg.reduce_dim, cfg.seed)
    clustering = cluster_documents(vectors, cfg.cluster)
    state.warnings.extend(clustering.warnings)
    topics = build_topics(clustering, docs, vectors)
    if not topics:
        state.warnings.append("no topics found")
    dump_json(clustering.to_json(cfg.cluster), out / CLUSTERING)
    dump_json([t.to_json() for t in topics], out / TOPICS_JSON)
    (out / TOPICS_CSV).write_text(topics_csv(topics), encoding="utf-8")
    report = topic_report(topics, cfg.top_n)
    state.stats.update(
        topic_count=len(topics),
        outlier_count=clustering.n_outliers,
        coverage_at_top_n=report.coverage,
    )
    return topics, clustering


def read_topics(cfg: PipelineConfig, stage: str) -> list[Topic]:
    path = _require(Path(cfg.out_dir) / TOPICS_JSON, stage, "topics")
    return [Topic.from_json(t) for t in load_json(path)]


def map_stage(cfg: PipelineConfig, state: RunState | None = None, topics=None) -> list[dict]:
    state = state or RunState()
    out = Path(cfg.out_dir)
    if topics is None:
        topics = read_topics(cfg, "map")
    points = intertopic_map(topics[: cfg.top_n], cfg.seed) if topics else []
    if not topics:
        state.warnings.append("no topics to map")
    dump_json(points, out / MAP_JSON)
    (out / MAP_SVG).write_text(map_svg(points), encoding="utf-8")
    return points


def summarize_stage(cfg: PipelineConfig, state: RunState | None = None, records=None, topics=None):
    state = state or RunState()
    out = Path(cfg.out_dir)
    if records is None:
        records = read_documents(_require(out / DOCUMENTS, "summarize", "ingest"))
    if topics is None:
        topics = read_topics(cfg, "summarize")
    posts = [r.post for r in records]
    index = CorpusIndex.build(posts, [r.doc for r in records], cfg.embedder)
    scfg = cfg.summary_config()
    chosen = topics[: cfg.top_n]

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        question_sums = list(pool.map(lambda t: summarize_topic_questions(t, index, scfg), chosen))
    for s in question_sums:
        state.warnings.extend(s.warnings)

    has_answers = any(p.post_type == ANSWER for p in posts)
    pairs = []
    if has_answers:
        policy = AnswerFilterPolicy.from_corpus(posts, cfg.answer_threshold)
        state.stats["answer_threshold"] = policy.threshold
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(
                lambda ts: problems_and_solutions(ts[0], index, policy, scfg, ts[1]),
                zip(chosen, question_sums),
            ))
        for t, report in zip(chosen, reports):
            for ps in report:
                state.warnings.extend(ps.solutions.warnings)
            pairs.append((t.topic_id, report))
    else:
        state.warnings.append("corpus has no answers; answer summaries are empty")
        pairs = [(t.topic_id, []) for t in chosen]
    dump_json(question_summaries_json(question_sums), out / QUESTION_SUMMARIES)
    dump_json(answer_summaries_json(pairs), out / ANSWER_SUMMARIES)
    return question_sums, pairs


def _config_echo(cfg: PipelineConfig) -> dict:
    echo = cfg.to_dict()
    # The output location and worker count do not affect results.
    echo.pop("out_dir")
    echo.pop("jobs")
    return echo


def run_all(cfg: PipelineConfig) -> dict:
    """Run every stage and write ``run_manifest.json``; returns the manifest."""
    state = RunState()
    records = ingest_stage(cfg, state)
    topics, _ = topics_stage(cfg, state, records)
    map_stage(cfg, state, topics)
    summarize_stage(cfg, state, records, topics)
    manifest = {
        "version": __version__,
        "config": _config_echo(cfg),
        "stats": {
            key: state.stats.get(key) for key in (
                "total_posts", "questions", "answers", "orphan_answers", "empty_after_strip",
                "topic_count", "outlier_count", "coverage_at_top_n", "answer_threshold",
            )
        },
        "artifacts": [name for name in ARTIFACTS if name != MANIFEST],
        "warnings": state.warnings,
    }
    dump_json(manifest, Path(cfg.out_dir) / MANIFEST)
    return manifest


def load_vectors(cfg: PipelineConfig, records) -> list[DocVector]:
    table = read_embeddings(Path(cfg.out_dir) / VECTORS)
    return [DocVector(r.doc.post_id, table[r.doc.post_id]) for r in records]


def load_clustering(cfg: PipelineConfig) -> Clustering:
    return Clustering.from_json(load_json(Path(cfg.out_dir) / CLUSTERING))

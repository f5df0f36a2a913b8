"""Document and sentence embeddings, random projection, and 2-D topic maps.

The default embedder is a signed feature-hashing TF-IDF; vectors produced
offline by any other model can be supplied through an embedding file
instead (see :func:`read_embeddings`).
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .prep import CleanDocument, tokenize

HASHED_TFIDF = "hashed_tfidf"
EXTERNAL_FILE = "external_file"

_MAGIC = b"EMBD"


class EmbeddingError(ValueError):
    pass


@dataclass
class EmbedderSpec:
    kind: str = HASHED_TFIDF
    dimension: int = 256
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in (HASHED_TFIDF, EXTERNAL_FILE):
            raise EmbeddingError(f"unknown embedder kind {self.kind!r}")
        if not 0 <= self.seed < 2**64:
            raise EmbeddingError("seed must be a 64-bit unsigned integer")
        if self.kind == EXTERNAL_FILE and not self.path:
            raise EmbeddingError("external_file embedder requires a path")
        if self.kind == HASHED_TFIDF and self.dimension < 16:
            raise EmbeddingError("hashed_tfidf requires dimension >= 16")


@dataclass
class DocVector:
    post_id: int
    full: np.ndarray
    reduced: np.ndarray | None = None


def _digest(token: str, seed: int, person: bytes) -> int:
    h = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little"), person=person
    )
    return int.from_bytes(h.digest(), "little")


def bucket(token: str, dimension: int, seed: int) -> tuple[int, float]:
    """Hash bucket and sign of ``token``; stable across processes."""
    index = _digest(token, seed, b"bucket") % dimension
    sign = 1.0 if _digest(token, seed, b"sign") & 1 else -1.0
    return index, sign


@dataclass
class HashedTfidf:
    """Signed hashing TF-IDF with ``idf(t) = ln(1 + N / df(t))``.

    The document-frequency table is frozen by :meth:`fit`. Terms never seen
    during fitting are given ``df = 1``.
    """

    dimension: int = 256
    seed: int = 0
    n_docs: int = 0
    df: Counter = field(default_factory=Counter)

    def fit(self, token_lists: Sequence[Sequence[str]]) -> "HashedTfidf":
        self.n_docs = len(token_lists)
        self.df = Counter()
        for tokens in token_lists:
            self.df.update(set(tokens))
        return self

    def idf(self, term: str) -> float:
        n = max(self.n_docs, 1)
        return math.log(1.0 + n / self.df.get(term, 1))

    def _bucket(self, term):
        cache = self.__dict__.setdefault("_buckets", {})
        if term not in cache:
            cache[term] = bucket(term, self.dimension, self.seed)
        return cache[term]

    def transform(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray:
        out = np.zeros((len(token_lists), self.dimension), dtype=np.float64)
        for row, tokens in enumerate(token_lists):
            # sorted() fixes the summation order, so results are reproducible.
            for term, tf in sorted(Counter(tokens).items()):
                index, sign = self._bucket(term)
                out[row, index] += sign * tf * self.idf(term)
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        np.divide(out, norms, out=out, where=norms > 0)
        return out.astype(np.float32)


# ------------------------------------------------------- embedding files


def write_embeddings(path, vectors: Sequence[DocVector]) -> None:
    """Write vectors in the binary ``EMBD`` format.

    Layout: ``b"EMBD"``, u32 count, u32 dim, then per record a u64 post id
    followed by ``dim`` little-endian f32 values.
    """
    dim = len(vectors[0].full) if vectors else 0
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<II", len(vectors), dim))
        for v in vectors:
            full = np.asarray(v.full, dtype="<f4")
            if full.shape != (dim,):
                raise EmbeddingError(f"post {v.post_id}: dimension {full.shape} != {dim}")
            fh.write(struct.pack("<Q", v.post_id))
            fh.write(full.tobytes())


def read_embeddings(path) -> dict[int, np.ndarray]:
    """Read an ``EMBD`` binary file or a JSONL file of ``{"id", "vec"}``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"embedding file not found: {path}")
    raw = path.read_bytes()
    vectors: dict[int, np.ndarray] = {}
    if raw[:4] == _MAGIC:
        count, dim = struct.unpack_from("<II", raw, 4)
        rec = 8 + 4 * dim
        if len(raw) != 12 + count * rec:
            raise EmbeddingError(f"{path}: truncated embedding file")
        for i in range(count):
            off = 12 + i * rec
            (pid,) = struct.unpack_from("<Q", raw, off)
            vectors[pid] = np.frombuffer(raw, dtype="<f4", count=dim, offset=off + 8).astype(np.float32)
    else:
        dim = None
        for lineno, line in enumerate(raw.decode("utf-8").splitlines(), 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            vec = np.asarray(obj["vec"], dtype=np.float32)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingError(f"{path} line {lineno}: id {obj['id']} has dimension {len(vec)}, expected {dim}")
            vectors[int(obj["id"])] = vec
    for pid, vec in vectors.items():
        if not np.all(np.isfinite(vec)):
            raise EmbeddingError(f"{path}: non-finite value in vector for id {pid}")
    return vectors


# ------------------------------------------------------------ operations


def fit_embedder(docs: Sequence[CleanDocument], spec: EmbedderSpec) -> HashedTfidf:
    """Hashing TF-IDF fitted on the corpus document frequencies.

    Sentence embedding always goes through this, even when documents come
    from an external file: the file holds one vector per post, not per
    sentence.
    """
    dim = spec.dimension if spec.kind == HASHED_TFIDF else 256
    return HashedTfidf(dimension=dim, seed=spec.seed).fit([d.tokens for d in docs])


def embed_corpus(docs: Sequence[CleanDocument], spec: EmbedderSpec) -> list[DocVector]:
    if not docs:
        raise EmbeddingError("embed_corpus needs at least one document")
    if spec.kind == HASHED_TFIDF:
        matrix = fit_embedder(docs, spec).transform([d.tokens for d in docs])
        return [DocVector(d.post_id, matrix[i]) for i, d in enumerate(docs)]

    table = read_embeddings(spec.path)
    out = []
    for d in docs:
        if d.post_id not in table:
            raise EmbeddingError(f"embedding file {spec.path} has no vector for id {d.post_id}")
        vec = table[d.post_id]
        if len(vec) != spec.dimension:
            raise EmbeddingError(
                f"id {d.post_id}: embedding dimension {len(vec)} != configured {spec.dimension}"
            )
        out.append(DocVector(d.post_id, vec))
    return out


def embed_sentences(
    sentences: Sequence[str],
    spec: EmbedderSpec,
    embedder: HashedTfidf | None = None,
    stopwords: frozenset | None = None,
) -> np.ndarray:
    """Embed sentences as one-off documents against a fitted df table.

    Without ``embedder`` the df table is built from the sentences themselves.
    """
    token_lists = [tokenize(s, stopwords) for s in sentences]
    if embedder is None:
        dim = spec.dimension if spec.kind == HASHED_TFIDF else 256
        embedder = HashedTfidf(dimension=dim, seed=spec.seed).fit(token_lists)
    return embedder.transform(token_lists)


def projection_matrix(source_dim: int, target_dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, 1.0 / math.sqrt(target_dim), size=(source_dim, target_dim))


def project(matrix: np.ndarray, target_dim: int, seed: int) -> np.ndarray:
    """Gaussian random projection of the rows of ``matrix``."""
    matrix = np.asarray(matrix, dtype=np.float64)
    source_dim = matrix.shape[1]
    if target_dim >= source_dim:
        raise EmbeddingError(f"target_dim {target_dim} must be < source dimension {source_dim}")
    return matrix @ projection_matrix(source_dim, target_dim, seed)


def reduce(vectors: Sequence[DocVector], target_dim: int, seed: int) -> list[DocVector]:
    """Attach a seeded random projection of each ``full`` vector as ``reduced``."""
    if len(vectors) < 2:
        raise EmbeddingError("reduce needs at least two vectors")
    reduced = project(np.stack([v.full for v in vectors]), target_dim, seed)
    return [DocVector(v.post_id, v.full, reduced[i]) for i, v in enumerate(vectors)]


def map_coordinates(centroids: Sequence[np.ndarray], seed: int) -> np.ndarray:
    """Project centroids to 2-D and scale them into the unit square.

    One common scale factor is used for both axes so relative distances are
    preserved; the shorter axis is centred. Identical points all land on
    ``(0.5, 0.5)``.
    """
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    if len(centroids) == 0:
        raise EmbeddingError("map_coordinates needs at least one centroid")
    if centroids.shape[1] > 2:
        points = project(centroids, 2, seed)
    else:
        points = np.pad(centroids, ((0, 0), (0, 2 - centroids.shape[1])))
    lo = points.min(axis=0)
    extent = points.max(axis=0) - lo
    span = extent.max()
    if span <= 0:
        return np.full((len(points), 2), 0.5)
    return (points - lo) / span + (1.0 - extent / span) / 2.0

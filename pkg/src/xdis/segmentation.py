"""Semantic segmentation of articles: embed sentences, pick k, cluster, merge.

Clustering is plain Lloyd iteration with k-means++ seeding, best of several
restarts by WCSS, deterministic for a given (seed, restarts). Embeddings are
unit-normalized so squared Euclidean distance is monotone in cosine distance.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CleanArticle
from .errors import RangeError, TooFewSentencesError, ValidationError
from .ndjson import read_records, require, write_records

MAX_LLOYD_ITERATIONS = 300
DEFAULT_RESTARTS = 10


@dataclass
class EmbeddingSet:
    article_id: str
    dim: int
    vectors: np.ndarray  # (n_sentences, dim), rows unit-normalized

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass
class ClusterAssignment:
    k: int
    labels: np.ndarray
    centroids: np.ndarray
    wcss: float
    # post-assignment WCSS of each Lloyd iteration of the winning restart
    wcss_history: list[float] = field(default_factory=list)


@dataclass
class KSelection:
    k_range: tuple[int, int]
    wcss_curve: list[float]
    silhouette_curve: list[float]
    chosen_k: int
    elbow_k: int | None = None


@dataclass
class SegmentationResult:
    article_id: str
    k_used: int
    segments: list[list[int]]
    labels: list[int]


# --------------------------------------------------------------------------
# Embeddings.

def _unit_rows(vectors: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0):
        raise ValidationError(f"{what}: zero vector cannot be normalized")
    return vectors / norms[:, None]


def load_embeddings(
    path: str | Path, corpus: list[CleanArticle]
) -> dict[str, EmbeddingSet]:
    """Load per-sentence vectors, validate completeness, unit-normalize.

    Articles absent from the file are simply absent from the result; partially
    covered articles are an error.
    """
    counts = {a.id: len(a.sentences) for a in corpus}
    grouped: dict[str, dict[int, np.ndarray]] = {}
    dims: dict[str, int] = {}
    for lineno, record in read_records(path):
        article_id = require(record, "article_id", lineno)
        index = require(record, "sentence_index", lineno)
        vector = np.asarray(require(record, "vector", lineno), dtype=float)
        if article_id not in counts:
            raise ValidationError(f"line {lineno}: unknown article id {article_id!r}")
        if not isinstance(index, int) or not 0 <= index < counts[article_id]:
            raise ValidationError(
                f"line {lineno}: sentence_index {index!r} out of range for "
                f"{article_id!r}"
            )
        if vector.ndim != 1 or not np.all(np.isfinite(vector)):
            raise ValidationError(f"line {lineno}: vector must be a flat finite list")
        if article_id in dims and dims[article_id] != vector.size:
            raise ValidationError(
                f"line {lineno}: dimension {vector.size} differs from "
                f"{dims[article_id]} for {article_id!r}"
            )
        dims[article_id] = vector.size
        slots = grouped.setdefault(article_id, {})
        if index in slots:
            raise ValidationError(
                f"line {lineno}: duplicate vector for ({article_id!r}, {index})"
            )
        slots[index] = vector

    result = {}
    for article_id, slots in grouped.items():
        expected = counts[article_id]
        missing = sorted(set(range(expected)) - set(slots))
        if missing:
            raise ValidationError(
                f"article {article_id!r}: missing vectors for sentences {missing}"
            )
        matrix = np.stack([slots[i] for i in range(expected)])
        result[article_id] = EmbeddingSet(
            article_id, dims[article_id], _unit_rows(matrix, f"article {article_id!r}")
        )
    return result


def lexical_fallback_embed(
    sentences: list[str], dim: int, article_id: str = ""
) -> EmbeddingSet:
    """Deterministic character-3-gram hash embedding; a stand-in for a real
    sentence encoder in tests and offline runs."""
    if dim < 8:
        raise ValidationError("embedding dim must be >= 8")
    vectors = np.zeros((len(sentences), dim))
    for row, sentence in enumerate(sentences):
        if not sentence:
            raise ValidationError(f"sentence {row} is empty: nothing to embed")
        grams = [sentence[i : i + 3] for i in range(len(sentence) - 2)] or [sentence]
        for gram in grams:
            vectors[row, zlib.crc32(gram.encode("utf-8")) % dim] += 1.0
    return EmbeddingSet(article_id, dim, _unit_rows(vectors, "fallback embedding"))


def write_embeddings(path: str | Path, embeddings: dict[str, EmbeddingSet]) -> None:
    records = []
    for article_id in sorted(embeddings):
        emb = embeddings[article_id]
        for index in range(len(emb)):
            records.append(
                {
                    "article_id": article_id,
                    "sentence_index": index,
                    "vector": [float(v) for v in emb.vectors[index]],
                }
            )
    write_records(path, records)


# --------------------------------------------------------------------------
# k-means.

def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[int(rng.integers(n))]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[i] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _lloyd(
    x: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    n = x.shape[0]
    centroids = _kmeans_pp_init(x, k, rng)
    labels = None
    history: list[float] = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for _repair in range(k):
            empty = [c for c in range(k) if not np.any(new_labels == c)]
            if not empty:
                break
            # reseed the empty centroid at the point farthest from its centroid
            farthest = int(d2[np.arange(n), new_labels].argmax())
            centroids[empty[0]] = x[farthest]
            d2[:, empty[0]] = ((x - centroids[empty[0]]) ** 2).sum(axis=1)
            new_labels = d2.argmin(axis=1)
        history.append(float(d2[np.arange(n), new_labels].sum()))
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for c in range(k):
            members = x[labels == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    return labels, centroids, history


def kmeans_cluster(
    emb: EmbeddingSet,
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> ClusterAssignment:
    """Best of `restarts` Lloyd runs by WCSS; restart r uses seed + r."""
    n = len(emb)
    if not 1 <= k <= n:
        raise RangeError(f"k={k} outside [1, {n}]")
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    best = None
    for r in range(restarts):
        labels, centroids, history = _lloyd(emb.vectors, k, np.random.default_rng(seed + r))
        if best is None or history[-1] < best.wcss:
            best = ClusterAssignment(k, labels, centroids, history[-1], history)
    return best


def silhouette_score(emb: EmbeddingSet, assignment: ClusterAssignment) -> float:
    """Mean silhouette over all points: (b - a) / max(a, b) with the usual
    conventions (singletons score 0, coincident points score 0)."""
    if assignment.k < 2:
        raise RangeError("silhouette needs at least 2 clusters")
    x = emb.vectors
    labels = assignment.labels
    n = x.shape[0]
    dist = np.sqrt(np.maximum(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2), 0.0))
    members = {c: np.flatnonzero(labels == c) for c in range(assignment.k)}
    if any(len(idx) == 0 for idx in members.values()):
        raise ValidationError("silhouette requires every cluster to be non-empty")

    scores = np.zeros(n)
    for i in range(n):
        own = members[labels[i]]
        if len(own) == 1:
            continue  # singleton: s = 0
        a = dist[i, own[own != i]].mean()
        b = min(dist[i, members[c]].mean() for c in members if c != labels[i])
        top = max(a, b)
        if top > 0:
            scores[i] = (b - a) / top
    return float(scores.mean())


def select_optimal_k(
    emb: EmbeddingSet,
    k_range: tuple[int, int] | None = None,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> KSelection:
    """Pick k by maximum silhouette over the range (ties toward smaller k);
    the WCSS elbow is computed as a diagnostic only."""
    n = len(emb)
    if n < 4:
        raise TooFewSentencesError(
            f"{n} sentences: cluster-count selection needs at least 4"
        )
    if k_range is None:
        k_range = (2, min(10, n - 1))
    lo, hi = k_range
    if not 2 <= lo <= hi <= n:
        raise RangeError(f"invalid k range [{lo}, {hi}] for {n} sentences")

    wcss_curve: list[float] = []
    silhouette_curve: list[float] = []
    for k in range(lo, hi + 1):
        assignment = kmeans_cluster(emb, k, seed, restarts)
        wcss_curve.append(assignment.wcss)
        silhouette_curve.append(silhouette_score(emb, assignment))

    chosen_k = lo + int(np.argmax(silhouette_curve))
    elbow_k = None
    if len(wcss_curve) >= 3:
        second_diff = [
            wcss_curve[i - 1] - 2 * wcss_curve[i] + wcss_curve[i + 1]
            for i in range(1, len(wcss_curve) - 1)
        ]
        elbow_k = lo + 1 + int(np.argmax(second_diff))
    return KSelection((lo, hi), wcss_curve, silhouette_curve, chosen_k, elbow_k)


def average_optimal_k(selections: list[KSelection]) -> int:
    """Corpus-wide k: mean of the per-article choices, rounded half away from
    zero, never below 2."""
    if not selections:
        raise ValidationError("no k selections to average")
    mean = sum(s.chosen_k for s in selections) / len(selections)
    return max(2, int(np.floor(mean + 0.5)))


# --------------------------------------------------------------------------
# Segmentation with small-cluster merging.

def segment_article(
    article: CleanArticle,
    emb: EmbeddingSet | None,
    k: int,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> SegmentationResult:
    """Partition an article's sentences into segments.

    Articles with fewer than 4 sentences become a single segment (and need no
    embeddings). Otherwise k-means runs with k clamped to n // 2 and clusters
    smaller than 2 are merged into the cluster with the nearest centroid.
    """
    n = len(article.sentences)
    if n == 0:
        raise ValidationError(f"article {article.id!r} has no sentences")
    if n < 4:
        return SegmentationResult(article.id, 1, [list(range(n))], [0] * n)
    if emb is None:
        raise ValidationError(f"article {article.id!r}: embeddings required")
    if len(emb) != n:
        raise ValidationError(
            f"article {article.id!r}: {len(emb)} vectors for {n} sentences"
        )

    k_eff = max(1, min(k, n // 2))
    assignment = kmeans_cluster(emb, k_eff, seed, restarts)
    labels = assignment.labels.copy()
    clusters = {c: set(np.flatnonzero(labels == c)) for c in set(labels.tolist())}
    centroids = {c: emb.vectors[sorted(idx)].mean(axis=0) for c, idx in clusters.items()}

    while len(clusters) > 1:
        small = sorted((len(idx), c) for c, idx in clusters.items())
        size, c = small[0]
        if size >= 2:
            break
        nearest = min(
            (float(((centroids[c] - centroids[o]) ** 2).sum()), o)
            for o in clusters
            if o != c
        )[1]
        clusters[nearest] |= clusters.pop(c)
        centroids.pop(c)
        centroids[nearest] = emb.vectors[sorted(clusters[nearest])].mean(axis=0)

    segments = sorted(
        (sorted(int(i) for i in idx) for idx in clusters.values()), key=lambda s: s[0]
    )
    final_labels = [0] * n
    for label, segment in enumerate(segments):
        for idx in segment:
            final_labels[idx] = label
    return SegmentationResult(article.id, k_eff, segments, final_labels)


def write_segmentations(path: str | Path, results: list[SegmentationResult]) -> None:
    write_records(
        path,
        [
            {"article_id": r.article_id, "k_used": r.k_used, "segments": r.segments}
            for r in results
        ],
    )

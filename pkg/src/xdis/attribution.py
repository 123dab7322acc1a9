"""Attribution ingestion and sentence-level aggregation.

Attribution scores are produced elsewhere (by whatever explanation backend);
this module only gets them into a validated, sentence-aligned form. Token
streams are reduced onto the sentence spans of the cleaned article, either via
character offsets or by greedy text alignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .corpus import CleanArticle, SentenceSpan
from .errors import AlignmentError, ValidationError
from .ndjson import read_records, require, write_records

DEFAULT_METHODS = ["attention", "deeplift", "lime", "gradient_shap"]

AggregationMode = Literal["sum", "mean"]


def normalize_method(name: str) -> str:
    """Method names compare case-insensitively; canonical form is lowercase."""
    name = name.strip().lower()
    if not name:
        raise ValidationError("method name must be non-empty")
    return name


@dataclass
class TokenAttribution:
    article_id: str
    method: str
    tokens: list[str]
    scores: np.ndarray
    char_offsets: list[tuple[int, int]] | None = None


@dataclass
class Explanation:
    """Per-sentence attribution scores of one method for one article
    (or for one segment of it)."""

    article_id: str
    method: str
    scores: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, Explanation)
            and self.article_id == other.article_id
            and self.method == other.method
            and np.array_equal(self.scores, other.scores)
        )


def _as_finite_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{what} must be a flat list of numbers")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains a non-finite value")
    return arr


def aggregate_spans(
    attr: TokenAttribution,
    spans: list[SentenceSpan],
    mode: AggregationMode = "sum",
) -> Explanation:
    """Reduce token scores onto sentence spans.

    Tokens are assigned via char_offsets when present (first span a token
    overlaps), otherwise by greedy left-to-right alignment of the token text
    against the span texts. Tokens outside every span are dropped, so in sum
    mode the sentence totals conserve the assigned token mass exactly.
    """
    if mode not in ("sum", "mean"):
        raise ValidationError(f"unknown aggregation mode {mode!r}")
    scores = _as_finite_array(attr.scores, "scores")
    if len(attr.tokens) != scores.size:
        raise ValidationError(
            f"{len(attr.tokens)} tokens but {scores.size} scores"
        )

    if attr.char_offsets is not None:
        assignment = _assign_by_offsets(attr, spans)
    else:
        assignment = _assign_by_alignment(attr, spans)

    totals = np.zeros(len(spans))
    counts = np.zeros(len(spans), dtype=int)
    for token_idx, span_idx in enumerate(assignment):
        if span_idx is None:
            continue
        totals[span_idx] += scores[token_idx]
        counts[span_idx] += 1
    if mode == "mean":
        totals = np.divide(totals, counts, out=totals, where=counts > 0)
    return Explanation(attr.article_id, attr.method, totals)


def _assign_by_offsets(
    attr: TokenAttribution, spans: list[SentenceSpan]
) -> list[int | None]:
    if len(attr.char_offsets) != len(attr.tokens):
        raise ValidationError("char_offsets length does not match tokens")
    assignment: list[int | None] = []
    for start, end in attr.char_offsets:
        chosen = None
        for span in spans:
            if start < span.char_end and span.char_start < end:
                chosen = span.index
                break
        assignment.append(chosen)
    return assignment


def _assign_by_alignment(
    attr: TokenAttribution, spans: list[SentenceSpan]
) -> list[int | None]:
    """Match token text against span text, skipping whitespace on both sides.

    Any non-whitespace mismatch is a hard error naming the token; tokens left
    over once the spans are exhausted fall outside all spans.
    """
    assignment: list[int | None] = []
    span_idx = 0
    pos = 0
    for token_idx, token in enumerate(attr.tokens):
        first_span = None
        for ch in token:
            if ch.isspace():
                continue
            while span_idx < len(spans):
                text = spans[span_idx].text
                while pos < len(text) and text[pos].isspace():
                    pos += 1
                if pos < len(text):
                    break
                span_idx += 1
                pos = 0
            if span_idx >= len(spans):
                break  # past the last span: token is outside
            if spans[span_idx].text[pos] != ch:
                raise AlignmentError(
                    f"{ch!r} does not match span {span_idx} at offset {pos}",
                    token_index=token_idx,
                )
            if first_span is None:
                first_span = span_idx
            pos += 1
        assignment.append(first_span)
    return assignment


def normalize_minmax(scores) -> np.ndarray:
    """Min-max normalize into [0, 1]; a constant vector maps to all zeros."""
    arr = _as_finite_array(scores, "scores")
    if arr.size == 0:
        raise ValidationError("cannot normalize an empty vector")
    low, high = arr.min(), arr.max()
    if high == low:
        return np.zeros_like(arr)
    return (arr - low) / (high - low)


def slice_to_segment(expl: Explanation, segment: list[int]) -> Explanation:
    """Project an article-level explanation onto a segment's sentences."""
    n = expl.scores.size
    for prev, cur in zip([-1] + list(segment), segment):
        if not isinstance(cur, (int, np.integer)):
            raise ValidationError("segment indices must be integers")
        if cur <= prev:
            raise ValidationError("segment indices must be strictly increasing")
        if cur >= n:
            raise ValidationError(f"segment index {cur} out of range for {n} sentences")
    return Explanation(expl.article_id, expl.method, expl.scores[list(segment)])


# --------------------------------------------------------------------------
# The store: every (article, method) pair either holds an explanation or is
# recorded as missing, so averaging code can account for gaps.

@dataclass
class AttributionStore:
    explanations: dict[tuple[str, str], Explanation] = field(default_factory=dict)
    segment_explanations: dict[tuple[str, str, tuple[int, ...]], Explanation] = field(
        default_factory=dict
    )
    methods: list[str] = field(default_factory=list)
    article_ids: list[str] = field(default_factory=list)
    missing: list[tuple[str, str]] = field(default_factory=list)

    def get(self, article_id: str, method: str) -> Explanation | None:
        return self.explanations.get((article_id, normalize_method(method)))

    def get_segment(
        self, article_id: str, method: str, segment: list[int]
    ) -> Explanation | None:
        key = (article_id, normalize_method(method), tuple(segment))
        return self.segment_explanations.get(key)


def import_attributions(
    path: str | Path,
    corpus: list[CleanArticle],
    mode: AggregationMode = "sum",
) -> AttributionStore:
    """Load an attribution file and aggregate it against a clean corpus.

    Records are either token-level ("tokens" + "scores", optionally
    "char_offsets") or sentence-level ("sentence_scores"). Sentence-level
    records may carry a "segment" list of sentence indices, in which case the
    scores describe just that segment.
    """
    by_id = {a.id: a for a in corpus}
    store = AttributionStore(article_ids=[a.id for a in corpus])
    seen_methods: set[str] = set()

    for lineno, record in read_records(path):
        article_id = require(record, "article_id", lineno)
        method = normalize_method(require(record, "method", lineno))
        article = by_id.get(article_id)
        if article is None:
            raise ValidationError(
                f"line {lineno}: unknown article id {article_id!r}"
            )
        if method not in seen_methods:
            seen_methods.add(method)
            store.methods.append(method)

        if "sentence_scores" in record:
            scores = _as_finite_array(record["sentence_scores"], "sentence_scores")
            if "segment" in record:
                segment = record["segment"]
                _validate_segment(segment, len(article.sentences), lineno)
                if scores.size != len(segment):
                    raise ValidationError(
                        f"line {lineno}: {scores.size} scores for a "
                        f"{len(segment)}-sentence segment"
                    )
                key = (article_id, method, tuple(segment))
                if key in store.segment_explanations:
                    raise ValidationError(
                        f"line {lineno}: duplicate segment record for "
                        f"({article_id!r}, {method!r})"
                    )
                store.segment_explanations[key] = Explanation(article_id, method, scores)
                continue
            if scores.size != len(article.sentences):
                raise ValidationError(
                    f"line {lineno}: {scores.size} scores for article "
                    f"{article_id!r} with {len(article.sentences)} sentences"
                )
            expl = Explanation(article_id, method, scores)
        elif "tokens" in record:
            offsets = record.get("char_offsets")
            attr = TokenAttribution(
                article_id,
                method,
                list(record["tokens"]),
                _as_finite_array(require(record, "scores", lineno), "scores"),
                [tuple(pair) for pair in offsets] if offsets is not None else None,
            )
            expl = aggregate_spans(attr, article.sentences, mode)
        else:
            raise ValidationError(
                f"line {lineno}: record has neither sentence_scores nor tokens"
            )

        key = (article_id, method)
        if key in store.explanations:
            raise ValidationError(
                f"line {lineno}: duplicate record for ({article_id!r}, {method!r})"
            )
        store.explanations[key] = expl

    store.missing = [
        (article_id, method)
        for article_id in store.article_ids
        for method in store.methods
        if (article_id, method) not in store.explanations
    ]
    return store


def _validate_segment(segment, n_sentences: int, lineno: int) -> None:
    if not isinstance(segment, list) or not segment:
        raise ValidationError(f"line {lineno}: segment must be a non-empty list")
    prev = -1
    for idx in segment:
        if not isinstance(idx, int) or idx <= prev or idx >= n_sentences:
            raise ValidationError(
                f"line {lineno}: bad segment index {idx!r} (article has "
                f"{n_sentences} sentences)"
            )
        prev = idx


def store_to_records(store: AttributionStore) -> list[dict]:
    """Canonical sentence-level dump of a store, deterministic order."""
    records = []
    for article_id in store.article_ids:
        for method in store.methods:
            expl = store.explanations.get((article_id, method))
            if expl is None:
                continue
            records.append(
                {
                    "article_id": article_id,
                    "method": method,
                    "sentence_scores": [float(s) for s in expl.scores],
                }
            )
    for key in sorted(store.segment_explanations):
        article_id, method, segment = key
        expl = store.segment_explanations[key]
        records.append(
            {
                "article_id": article_id,
                "method": method,
                "segment": list(segment),
                "sentence_scores": [float(s) for s in expl.scores],
            }
        )
    return records


def write_store(path: str | Path, store: AttributionStore) -> None:
    write_records(path, store_to_records(store))

"""Whole-article and per-segment analysis runs, report assembly and export.

A run averages each requested metric over analysis units (whole articles, or
segments rolled up into articles) for every method pair, and records exactly
which units were skipped and why, so that used + skipped always accounts for
the full corpus.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agreement import (
    METRICS,
    RELATIVE_METRICS,
    TOPK_METRICS,
    AgreementMatrix,
    compute_metric,
)
from .attribution import (
    AttributionStore,
    Explanation,
    normalize_minmax,
    slice_to_segment,
)
from .corpus import CleanArticle, TokenBudget, truncate_to_budget
from .errors import ConfigError, RangeError, UndefinedMetricError, ValidationError
from .segmentation import (
    EmbeddingSet,
    SegmentationResult,
    average_optimal_k,
    segment_article,
    select_optimal_k,
)

GLOBAL_K_VALUES = list(range(2, 12))
REGIONAL_K_VALUES = [2, 3, 4]

SEGMENT_SOURCES = ("native_per_segment", "slice_article_level")


@dataclass
class AnalysisConfig:
    methods: list[str]
    k_values: list[int] = field(default_factory=lambda: list(GLOBAL_K_VALUES))
    metrics: list[str] = field(default_factory=lambda: list(METRICS))
    aggregation: str = "sum"
    token_budget: TokenBudget = field(default_factory=TokenBudget)
    seed: int = 0
    restarts: int = 10
    segment_source: str = "native_per_segment"
    weighted_segments: bool = False
    use_magnitude: bool = True

    def validate(self) -> None:
        if len(self.methods) < 2:
            raise ConfigError("at least two methods required")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must be distinct")
        if not self.k_values or any(k < 2 for k in self.k_values):
            raise ConfigError("k values must all be >= 2")
        if list(self.k_values) != sorted(set(self.k_values)):
            raise ConfigError("k values must be strictly ascending")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad or not self.metrics:
            raise ConfigError(f"unknown metrics: {bad}" if bad else "no metrics requested")
        # canonical metric order keeps reports deterministic
        self.metrics = [m for m in METRICS if m in self.metrics]
        if self.aggregation not in ("sum", "mean"):
            raise ConfigError(f"unknown aggregation {self.aggregation!r}")
        if self.segment_source not in SEGMENT_SOURCES:
            raise ConfigError(f"unknown segment source {self.segment_source!r}")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")

    def echo(self) -> dict:
        return {
            "methods": list(self.methods),
            "k_values": list(self.k_values),
            "metrics": list(self.metrics),
            "aggregation": self.aggregation,
            "token_budget": {
                "max_tokens": self.token_budget.max_tokens,
                "tokenizer_id": self.token_budget.tokenizer_id,
            },
            "seed": self.seed,
            "restarts": self.restarts,
            "segment_source": self.segment_source,
            "weighted_segments": self.weighted_segments,
            "use_magnitude": self.use_magnitude,
        }


@dataclass
class Report:
    scope: str  # "global" or "regional"
    config: dict
    corpus_digest: dict
    matrices: list[AgreementMatrix]
    per_article: list[dict]
    skips: list[dict]

    def matrix(self, metric: str, k: int | None = None) -> AgreementMatrix:
        for m in self.matrices:
            if m.metric == metric and m.k == k:
                return m
        raise KeyError(f"no matrix for ({metric}, {k})")

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "config": self.config,
            "corpus_digest": self.corpus_digest,
            "matrices": [m.to_dict() for m in self.matrices],
            "per_article": self.per_article,
            "skips": self.skips,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(
            data["scope"],
            data["config"],
            data["corpus_digest"],
            [AgreementMatrix.from_dict(m) for m in data["matrices"]],
            data["per_article"],
            data["skips"],
        )


def corpus_digest(corpus: list[CleanArticle]) -> dict:
    payload = json.dumps([[a.id, a.text] for a in corpus], ensure_ascii=False)
    return {
        "articles": len(corpus),
        "sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
    }


def _metric_jobs(config: AnalysisConfig) -> list[tuple[str, int | None]]:
    jobs: list[tuple[str, int | None]] = []
    for metric in config.metrics:
        if metric in TOPK_METRICS:
            jobs.extend((metric, k) for k in config.k_values)
        else:
            jobs.append((metric, None))
    return jobs


def _method_pairs(methods: list[str]) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(methods)) for j in range(i + 1, len(methods))]


def _map_ordered(fn, items, jobs: int):
    """Order-preserving map, optionally fanned out over threads. Results are
    identical for any job count."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _assemble(
    scope: str,
    config: AnalysisConfig,
    digest: dict,
    results: list[tuple[AgreementMatrix, list[dict], list[dict]]],
) -> Report:
    matrices = [r[0] for r in results]
    per_article = [row for r in results for row in r[1]]
    skips = [row for r in results for row in r[2]]
    return Report(scope, config.echo(), digest, matrices, per_article, skips)


# --------------------------------------------------------------------------
# Whole-article analysis.

def run_global_analysis(
    corpus: list[CleanArticle],
    store: AttributionStore,
    config: AnalysisConfig,
    jobs: int = 1,
) -> Report:
    """Average every requested metric over whole articles per method pair.

    Articles shorter than k (top-k metrics) or shorter than 2 sentences
    (relative metrics) are skipped for that cell and accounted for.
    """
    config.validate()
    methods = config.methods
    article_ids = [a.id for a in corpus]

    def run_job(job: tuple[str, int | None]):
        metric, k = job
        per_article: list[dict] = []
        skips: list[dict] = []
        m = len(methods)
        values: list[list[float | None]] = [[None] * m for _ in range(m)]
        counts = [[0] * m for _ in range(m)]
        for i in range(m):
            values[i][i] = 1.0
            counts[i][i] = sum(
                1 for aid in article_ids if (aid, methods[i]) in store.explanations
            )
        for i, j in _method_pairs(methods):
            cell: list[float] = []
            for aid in article_ids:
                value, reason = _article_metric(store, aid, methods[i], methods[j], metric, k, config)
                if value is None:
                    skips.append(_skip_row(aid, None, metric, k, methods[i], methods[j], reason))
                    continue
                cell.append(value)
                per_article.append(_value_row(aid, metric, k, methods[i], methods[j], value))
            if cell:
                values[i][j] = values[j][i] = float(np.mean(cell))
            counts[i][j] = counts[j][i] = len(cell)
        return AgreementMatrix(metric, k, list(methods), values, counts), per_article, skips

    results = _map_ordered(run_job, _metric_jobs(config), jobs)
    return _assemble("global", config, corpus_digest(corpus), results)


def _article_metric(
    store: AttributionStore,
    article_id: str,
    method_a: str,
    method_b: str,
    metric: str,
    k: int | None,
    config: AnalysisConfig,
) -> tuple[float | None, str | None]:
    ea = store.explanations.get((article_id, method_a))
    eb = store.explanations.get((article_id, method_b))
    if ea is None or eb is None:
        absent = method_a if ea is None else method_b
        return None, f"missing explanation: {absent}"
    try:
        return compute_metric(metric, ea, eb, k, config.use_magnitude), None
    except RangeError:
        return None, "too few sentences"
    except UndefinedMetricError:
        return None, "constant ranking"


def _skip_row(article_id, segment, metric, k, method_a, method_b, reason) -> dict:
    return {
        "article_id": article_id,
        "segment": segment,
        "metric": metric,
        "k": k,
        "method_a": method_a,
        "method_b": method_b,
        "reason": reason,
    }


def _value_row(article_id, metric, k, method_a, method_b, value) -> dict:
    return {
        "article_id": article_id,
        "metric": metric,
        "k": k,
        "method_a": method_a,
        "method_b": method_b,
        "value": value,
    }


# --------------------------------------------------------------------------
# Per-segment analysis.

def run_regional_analysis(
    corpus: list[CleanArticle],
    store: AttributionStore,
    embeddings: dict[str, EmbeddingSet],
    config: AnalysisConfig,
    jobs: int = 1,
) -> Report:
    """Segment every article, compute metrics per segment, then roll up:
    segments average into an article value, article values into the cell.

    Per-segment explanations come from the store when segment_source is
    "native_per_segment", otherwise by slicing the article-level explanation.
    Articles that cannot be segmented are skipped and accounted for.
    """
    config.validate()
    digest = corpus_digest(corpus)
    articles = [truncate_to_budget(a, config.token_budget) for a in corpus]
    segmentations = segment_corpus(
        articles, embeddings, seed=config.seed, restarts=config.restarts, jobs=jobs
    )
    by_id = {s.article_id: s for s, _ in segmentations.values() if s is not None}
    reasons = {aid: reason for aid, (_, reason) in segmentations.items()}
    methods = config.methods

    def run_job(job: tuple[str, int | None]):
        metric, k = job
        per_article: list[dict] = []
        skips: list[dict] = []
        m = len(methods)
        values: list[list[float | None]] = [[None] * m for _ in range(m)]
        counts = [[0] * m for _ in range(m)]
        for i in range(m):
            values[i][i] = 1.0
            counts[i][i] = sum(
                1 for a in articles if (a.id, methods[i]) in store.explanations
            )
        for i, j in _method_pairs(methods):
            cell: list[float] = []
            for article in articles:
                segmentation = by_id.get(article.id)
                if segmentation is None:
                    skips.append(
                        _skip_row(article.id, None, metric, k, methods[i], methods[j], reasons[article.id])
                    )
                    continue
                segment_values: list[float] = []
                sizes: list[int] = []
                for segment in segmentation.segments:
                    value, reason = _segment_metric(
                        store, article, segment, methods[i], methods[j], metric, k, config
                    )
                    if value is None:
                        skips.append(
                            _skip_row(article.id, segment, metric, k, methods[i], methods[j], reason)
                        )
                        continue
                    segment_values.append(value)
                    sizes.append(len(segment))
                if not segment_values:
                    skips.append(
                        _skip_row(article.id, None, metric, k, methods[i], methods[j], "no usable segments")
                    )
                    continue
                if config.weighted_segments:
                    article_value = float(np.average(segment_values, weights=sizes))
                else:
                    article_value = float(np.mean(segment_values))
                cell.append(article_value)
                per_article.append(_value_row(article.id, metric, k, methods[i], methods[j], article_value))
            if cell:
                values[i][j] = values[j][i] = float(np.mean(cell))
            counts[i][j] = counts[j][i] = len(cell)
        return AgreementMatrix(metric, k, list(methods), values, counts), per_article, skips

    results = _map_ordered(run_job, _metric_jobs(config), jobs)
    return _assemble("regional", config, digest, results)


def segment_corpus(
    articles: list[CleanArticle],
    embeddings: dict[str, EmbeddingSet],
    seed: int = 0,
    restarts: int = 10,
    jobs: int = 1,
) -> dict[str, tuple[SegmentationResult | None, str | None]]:
    """Per-article segmentation with the corpus-averaged cluster count.

    Returns {article_id: (segmentation, skip_reason)}; exactly one of the two
    is set. Short articles (< 4 sentences) become single segments without
    touching embeddings.
    """

    def prepare(article: CleanArticle) -> tuple[EmbeddingSet | None, str | None]:
        n = len(article.sentences)
        if n < 4:
            return None, None
        emb = embeddings.get(article.id)
        if emb is None:
            return None, "missing embeddings"
        if len(emb) < n:
            return None, f"{len(emb)} embedding vectors for {n} sentences"
        if len(emb) > n:
            # embeddings for a longer (un-truncated) article: keep the prefix
            emb = EmbeddingSet(emb.article_id, emb.dim, emb.vectors[:n])
        return emb, None

    prepared = [prepare(a) for a in articles]

    def choose_k(item):
        emb, _ = item
        if emb is None:
            return None
        return select_optimal_k(emb, seed=seed, restarts=restarts)

    selections = [s for s in _map_ordered(choose_k, prepared, jobs) if s is not None]
    k_avg = average_optimal_k(selections) if selections else 2

    def build(pair) -> tuple[SegmentationResult | None, str | None]:
        article, (emb, reason) = pair
        if reason is not None:
            return None, reason
        if len(article.sentences) == 0:
            return None, "no sentences"
        return segment_article(article, emb, k_avg, seed, restarts), None

    built = _map_ordered(build, list(zip(articles, prepared)), jobs)
    return {a.id: result for a, result in zip(articles, built)}


def _segment_metric(
    store: AttributionStore,
    article: CleanArticle,
    segment: list[int],
    method_a: str,
    method_b: str,
    metric: str,
    k: int | None,
    config: AnalysisConfig,
) -> tuple[float | None, str | None]:
    if metric in TOPK_METRICS and len(segment) < k:
        return None, "too few sentences"
    if metric in RELATIVE_METRICS and len(segment) < 2:
        return None, "too few sentences"
    expls = []
    for method in (method_a, method_b):
        if config.segment_source == "native_per_segment":
            expl = store.get_segment(article.id, method, segment)
            if expl is None:
                return None, f"missing segment explanation: {method}"
        else:
            article_expl = store.explanations.get((article.id, method))
            if article_expl is None:
                return None, f"missing explanation: {method}"
            if article_expl.scores.size != len(article.sentences):
                return None, f"length mismatch: {method}"
            expl = slice_to_segment(article_expl, segment)
        expls.append(expl)
    try:
        return compute_metric(metric, expls[0], expls[1], k, config.use_magnitude), None
    except UndefinedMetricError:
        return None, "constant ranking"
    except RangeError:
        return None, "too few sentences"


# --------------------------------------------------------------------------
# Comparison and export.

def compare_reports(global_report: Report, regional_report: Report) -> dict:
    """Cell-by-cell comparison of a whole-article and a per-segment report."""
    if global_report.config["methods"] != regional_report.config["methods"]:
        raise ValidationError("reports analyse different method sets")
    if global_report.config["metrics"] != regional_report.config["metrics"]:
        raise ValidationError("reports analyse different metric sets")

    notes: list[str] = []
    rows: list[dict] = []
    methods = global_report.config["methods"]

    def available(report: Report, metric: str) -> dict[int | None, AgreementMatrix]:
        return {m.k: m for m in report.matrices if m.metric == metric}

    for metric in global_report.config["metrics"]:
        g_by_k = available(global_report, metric)
        r_by_k = available(regional_report, metric)
        by_none_then_value = lambda k: (k is None, k or 0)
        shared = sorted(set(g_by_k) & set(r_by_k), key=by_none_then_value)
        for k in sorted(set(g_by_k) | set(r_by_k), key=by_none_then_value):
            if k not in shared:
                notes.append(f"{metric}: k={k} present in only one report, not compared")
        for k in shared:
            g, r = g_by_k[k], r_by_k[k]
            for i, j in _method_pairs(methods):
                gv, rv = g.values[i][j], r.values[i][j]
                rows.append(
                    {
                        "metric": metric,
                        "k": k,
                        "method_a": methods[i],
                        "method_b": methods[j],
                        "global": gv,
                        "regional": rv,
                        "delta": (rv - gv) if gv is not None and rv is not None else None,
                        "regional_lower": (
                            rv < gv if gv is not None and rv is not None else None
                        ),
                    }
                )
    return {"rows": rows, "notes": notes}


def report_to_json(report: Report) -> str:
    return json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def export_report(report: Report, path: str | Path, fmt: str = "structured") -> None:
    """Write a report as canonical JSON or as a flat CSV of matrix cells."""
    if fmt == "structured":
        Path(path).write_text(report_to_json(report), encoding="utf-8")
    elif fmt == "flat":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "method_a", "method_b", "k", "value", "count"])
            for matrix in report.matrices:
                for i, j in _method_pairs(matrix.methods):
                    value = matrix.values[i][j]
                    writer.writerow(
                        [
                            matrix.metric,
                            matrix.methods[i],
                            matrix.methods[j],
                            "" if matrix.k is None else matrix.k,
                            "" if value is None else repr(value),
                            matrix.counts[i][j],
                        ]
                    )
    else:
        raise ValidationError(f"unknown export format {fmt!r}")


def load_report(path: str | Path) -> Report:
    with open(path, encoding="utf-8") as fh:
        return Report.from_dict(json.load(fh))


# --------------------------------------------------------------------------
# Visualization payload.

@dataclass
class VizPayload:
    title: str
    summary: str
    sentences: list[str]
    weights: list[float]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "summary": self.summary,
            "sentences": list(self.sentences),
            "weights": list(self.weights),
        }


def export_viz_payload(
    article: CleanArticle, expl: Explanation, summary: str, title: str
) -> VizPayload:
    if expl.scores.size != len(article.sentences):
        raise ValidationError(
            f"{expl.scores.size} scores for {len(article.sentences)} sentences"
        )
    weights = [float(w) for w in normalize_minmax(expl.scores)]
    return VizPayload(title, summary, [s.text for s in article.sentences], weights)


def write_viz_payload(path: str | Path, payload: VizPayload) -> None:
    Path(path).write_text(
        json.dumps(payload.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )

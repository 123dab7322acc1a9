"""Command-line entry points for reproducible batch runs.

Exit codes: 0 success, 1 validation/config error, 2 I/O error. Diagnostics go
to stderr; data goes to the requested output files (or stdout with `--out -`).
The XDIS_LOG environment variable (error|info|debug) controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline
from .attribution import import_attributions, normalize_method, write_store
from .corpus import (
    TokenBudget,
    clean_article,
    load_clean_corpus,
    load_corpus,
    truncate_to_budget,
    write_clean_corpus,
)
from .errors import ConfigError, ValidationError, XdisError
from .ndjson import write_records
from .segmentation import load_embeddings

log = logging.getLogger("xdis")

METRIC_ALIASES = {
    "fa": "feature_agreement",
    "ra": "rank_agreement",
    "pra": "pairwise_rank_agreement",
    "spearman": "spearman",
}

SEGMENT_SOURCE_ALIASES = {
    "native": "native_per_segment",
    "slice": "slice_article_level",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this toolkit reserves 2 for
    # I/O trouble, so route usage problems through exit code 1 instead.
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _parse_k_values(spec: str) -> list[int]:
    try:
        if ".." in spec:
            lo, hi = spec.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in spec.split(",") if part]
    except ValueError:
        raise ConfigError(f"cannot parse k values from {spec!r}") from None


def _parse_metrics(spec: str) -> list[str]:
    metrics = []
    for part in spec.split(","):
        part = part.strip().lower()
        if not part:
            continue
        metrics.append(METRIC_ALIASES.get(part, part))
    return metrics


def _parse_methods(spec: str) -> list[str]:
    return [normalize_method(part) for part in spec.split(",") if part.strip()]


def _add_analysis_flags(parser: argparse.ArgumentParser, regional: bool) -> None:
    parser.add_argument("--corpus", required=True, help="clean corpus file (from ingest)")
    parser.add_argument("--attributions", required=True, help="attribution file")
    parser.add_argument("--out", required=True, help="structured report destination")
    parser.add_argument("--flat", help="also write a flat CSV of matrix cells")
    parser.add_argument("--methods", help="comma-separated method names (default: all in store)")
    default_k = pipeline.REGIONAL_K_VALUES if regional else pipeline.GLOBAL_K_VALUES
    parser.add_argument(
        "--k",
        default=f"{default_k[0]}..{default_k[-1]}",
        help="top-k values, e.g. 2..11 or 2,3,5",
    )
    parser.add_argument(
        "--metrics",
        default="fa,ra,pra,spearman",
        help="comma-separated metrics: fa, ra, pra, spearman",
    )
    parser.add_argument("--agg", default="sum", choices=["sum", "mean"],
                        help="token-to-sentence aggregation for token-level records")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers (same output for any value)")
    parser.add_argument("--rank-by", default="magnitude", choices=["magnitude", "raw"],
                        help="rank features by |score| (default) or raw score")
    if regional:
        parser.add_argument("--embeddings", required=True, help="sentence embedding file")
        parser.add_argument("--restarts", type=int, default=10)
        parser.add_argument("--budget", type=int, default=1024, help="token budget before segmenting")
        parser.add_argument("--tokenizer", default="whitespace")
        parser.add_argument(
            "--segment-source",
            default="native",
            choices=["native", "slice"],
            help="per-segment explanations from the store (native) or sliced from article level",
        )
        parser.add_argument("--weighted-segments", action="store_true",
                            help="weight segment values by sentence count when averaging")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xdis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="clean raw articles into a corpus file")
    p.add_argument("--input", required=True, help="raw article file (NDJSON: id, text)")
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=1024, help="token budget (whole sentences kept)")
    p.add_argument("--tokenizer", default="whitespace")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("attr-import", help="validate and aggregate an attribution file")
    p.add_argument("--input", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--agg", default="sum", choices=["sum", "mean"])
    p.set_defaults(handler=_cmd_attr_import)

    p = sub.add_parser("agree-global", help="whole-article agreement matrices")
    _add_analysis_flags(p, regional=False)
    p.set_defaults(handler=_cmd_agree_global)

    p = sub.add_parser("segment", help="segment articles and export the partition")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--budget", type=int, default=1024)
    p.add_argument("--tokenizer", default="whitespace")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=_cmd_segment)

    p = sub.add_parser("agree-regional", help="per-segment agreement matrices")
    _add_analysis_flags(p, regional=True)
    p.set_defaults(handler=_cmd_agree_regional)

    p = sub.add_parser("compare", help="compare a global and a regional report")
    p.add_argument("--global", dest="global_path", required=True)
    p.add_argument("--regional", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("export-viz", help="write a visualization payload for one article")
    p.add_argument("--corpus", required=True)
    p.add_argument("--attributions", required=True)
    p.add_argument("--article", required=True, help="article id")
    p.add_argument("--method", required=True)
    p.add_argument("--summary", default="")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_export_viz)

    return parser


# --------------------------------------------------------------------------
# Handlers.

def _write_text(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_ingest(args) -> int:
    budget = TokenBudget(args.budget, args.tokenizer)
    articles = [clean_article(raw, budget) for raw in load_corpus(args.input)]
    write_clean_corpus(args.out, articles)
    log.info("ingested %d articles -> %s", len(articles), args.out)
    return 0


def _cmd_attr_import(args) -> int:
    corpus = load_clean_corpus(args.corpus)
    store = import_attributions(args.input, corpus, args.agg)
    write_store(args.out, store)
    log.info(
        "imported %d explanations (%d methods, %d missing pairs) -> %s",
        len(store.explanations), len(store.methods), len(store.missing), args.out,
    )
    return 0


def _make_config(args, store, regional: bool) -> pipeline.AnalysisConfig:
    methods = _parse_methods(args.methods) if args.methods else list(store.methods)
    config = pipeline.AnalysisConfig(
        methods=methods,
        k_values=_parse_k_values(args.k),
        metrics=_parse_metrics(args.metrics),
        aggregation=args.agg,
        seed=args.seed,
        use_magnitude=args.rank_by == "magnitude",
    )
    if regional:
        config.token_budget = TokenBudget(args.budget, args.tokenizer)
        config.restarts = args.restarts
        config.segment_source = SEGMENT_SOURCE_ALIASES[args.segment_source]
        config.weighted_segments = args.weighted_segments
    return config


def _load_inputs(args):
    corpus = load_clean_corpus(args.corpus)
    store = import_attributions(args.attributions, corpus, args.agg)
    return corpus, store


def _export(report, args) -> None:
    if args.out == "-":
        _write_text(args.out, pipeline.report_to_json(report))
    else:
        pipeline.export_report(report, args.out)
    if args.flat:
        pipeline.export_report(report, args.flat, fmt="flat")


def _cmd_agree_global(args) -> int:
    corpus, store = _load_inputs(args)
    config = _make_config(args, store, regional=False)
    report = pipeline.run_global_analysis(corpus, store, config, jobs=args.jobs)
    _export(report, args)
    log.info("global report: %d matrices, %d skips -> %s", len(report.matrices), len(report.skips), args.out)
    return 0


def _cmd_agree_regional(args) -> int:
    corpus, store = _load_inputs(args)
    embeddings = load_embeddings(args.embeddings, corpus)
    config = _make_config(args, store, regional=True)
    report = pipeline.run_regional_analysis(corpus, store, embeddings, config, jobs=args.jobs)
    _export(report, args)
    log.info("regional report: %d matrices, %d skips -> %s", len(report.matrices), len(report.skips), args.out)
    return 0


def _cmd_segment(args) -> int:
    corpus = load_clean_corpus(args.corpus)
    budget = TokenBudget(args.budget, args.tokenizer)
    articles = [truncate_to_budget(a, budget) for a in corpus]
    embeddings = load_embeddings(args.embeddings, articles)
    outcomes = pipeline.segment_corpus(
        articles, embeddings, seed=args.seed, restarts=args.restarts, jobs=args.jobs
    )
    results = []
    for article in articles:
        segmentation, reason = outcomes[article.id]
        if segmentation is None:
            log.warning("article %s skipped: %s", article.id, reason)
            continue
        results.append(segmentation)
    write_records(
        args.out,
        [
            {"article_id": r.article_id, "k_used": r.k_used, "segments": r.segments}
            for r in results
        ],
    )
    log.info("segmented %d/%d articles -> %s", len(results), len(articles), args.out)
    return 0


def _cmd_compare(args) -> int:
    global_report = pipeline.load_report(args.global_path)
    regional_report = pipeline.load_report(args.regional)
    comparison = pipeline.compare_reports(global_report, regional_report)
    _write_text(args.out, json.dumps(comparison, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
    flagged = sum(1 for row in comparison["rows"] if row["regional_lower"])
    log.info("compared %d cells (%d where regional < global) -> %s",
             len(comparison["rows"]), flagged, args.out)
    return 0


def _cmd_export_viz(args) -> int:
    corpus = load_clean_corpus(args.corpus)
    store = import_attributions(args.attributions, corpus)
    by_id = {a.id: a for a in corpus}
    article = by_id.get(args.article)
    if article is None:
        raise ValidationError(f"unknown article id {args.article!r}")
    expl = store.get(args.article, args.method)
    if expl is None:
        raise ValidationError(
            f"no explanation for ({args.article!r}, {args.method!r})"
        )
    payload = pipeline.export_viz_payload(article, expl, args.summary, args.title)
    _write_text(
        args.out, json.dumps(payload.to_dict(), ensure_ascii=False, indent=2) + "\n"
    )
    return 0


# --------------------------------------------------------------------------
# Entry point.

def _setup_logging() -> None:
    level_name = os.environ.get("XDIS_LOG", "warning").lower()
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name, logging.WARNING
    )
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")


def parse_and_run(argv: list[str]) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if not getattr(args, "handler", None):
        parser.print_usage(sys.stderr)
        print("xdis: error: a subcommand is required", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except XdisError as exc:
        print(f"xdis: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"xdis: i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_run(sys.argv[1:]))


if __name__ == "__main__":
    main()

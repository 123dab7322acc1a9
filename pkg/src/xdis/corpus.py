"""Corpus ingestion: period normalization, period protection, sentence spans.

Sentence boundaries are detected purely from terminal periods, so all the
cleaning below exists to make periods mean exactly one thing. Normalization
rules rewrite the text; protection rules swap "structural" periods (initials,
URLs, emails, decimals) for placeholder tokens and record how to undo it.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IntegrityError, ValidationError
from .ndjson import read_records, require, write_records

log = logging.getLogger(__name__)

NAME_PERIOD = "[NAME_PERIOD_TOKEN]"
WEB_PERIOD = "[WEB_PERIOD_TOKEN]"
EMAIL_PERIOD = "[EMAIL_PERIOD_TOKEN]"
NUMBER_PERIOD = "[NUMBER_PERIOD_TOKEN]"

PLACEHOLDERS = (NAME_PERIOD, WEB_PERIOD, EMAIL_PERIOD, NUMBER_PERIOD)


@dataclass(frozen=True)
class Protection:
    """One placeholder substitution: `original` was replaced by `placeholder`
    starting at character `offset` of the protected text."""

    offset: int
    placeholder: str
    original: str


# Ordered left to right; applying the substitutions in reverse restores the
# pre-protection string exactly.
ProtectionMap = list[Protection]


@dataclass(frozen=True)
class SentenceSpan:
    index: int
    char_start: int
    char_end: int
    text: str


@dataclass
class RawArticle:
    id: str
    text: str


@dataclass
class CleanArticle:
    id: str
    text: str
    sentences: list[SentenceSpan]
    protections: ProtectionMap = field(default_factory=list)
    truncated: bool = False


@dataclass(frozen=True)
class TokenBudget:
    max_tokens: int = 1024
    tokenizer_id: str = "whitespace"


# Pluggable token counters, keyed by TokenBudget.tokenizer_id. The default
# counts maximal non-whitespace runs.
TOKEN_COUNTERS = {
    "whitespace": lambda text: len(text.split()),
}


# --------------------------------------------------------------------------
# Normalization (rules 1-4): rewrite text, record nothing.

_QUOTE_SPACE_PERIOD = re.compile(r'" \.')
# Skip quotes already preceded by a period so re-running the cleaner cannot
# shuffle an already-normalized `."` pair.
_QUOTE_PERIOD = re.compile(r'(?<!\.)"\.')
_MULTI_PERIOD = re.compile(r"\.{2,}")
_QMARK_SPACED_PERIOD = re.compile(r"\?\s+\.")


def _fix_quoted_periods(text: str) -> str:
    text = _QUOTE_SPACE_PERIOD.sub('".', text)
    return _QUOTE_PERIOD.sub('."', text)


def _ensure_termination(text: str) -> str:
    lines = []
    for line in text.split("\n"):
        line = line.strip()
        if not line:
            continue
        core = line.rstrip('"')
        quotes = line[len(core):]
        if not core.endswith("."):
            core += "."
        lines.append(core + quotes)
    return " ".join(lines)


def _collapse_periods(text: str) -> str:
    return _MULTI_PERIOD.sub(".", text)


def _standardize_question_marks(text: str) -> str:
    return _QMARK_SPACED_PERIOD.sub("?.", text)


# --------------------------------------------------------------------------
# Protection (rules 5-6): swap structural periods for placeholders.

_NAME_INITIAL = re.compile(r"(?<![A-Za-z])[A-Z]\.(?=\s+[A-Z])")
_TOKEN = re.compile(r"\S+")


def _internal_dots(token: str) -> list[int]:
    """Offsets (within token) of periods flanked by alphanumerics."""
    return [
        i
        for i in range(1, len(token) - 1)
        if token[i] == "." and token[i - 1].isalnum() and token[i + 1].isalnum()
    ]


def _decimal_dots(token: str) -> list[int]:
    return [
        i
        for i in range(1, len(token) - 1)
        if token[i] == "." and token[i - 1].isdigit() and token[i + 1].isdigit()
    ]


def _protection_sites(text: str) -> list[tuple[int, str]]:
    """All (period position, placeholder) substitutions, position-ascending.

    Name-initial periods sit at token ends (they require whitespace after),
    and the token classes below only claim token-internal periods, so the
    site sets never overlap.
    """
    sites = [(m.end() - 1, NAME_PERIOD) for m in _NAME_INITIAL.finditer(text)]
    for m in _TOKEN.finditer(text):
        token = m.group()
        if "@" in token:
            sites.extend((m.start() + i, EMAIL_PERIOD) for i in _internal_dots(token))
        elif token.lower().startswith("www.") or len(_internal_dots(token)) >= 2:
            sites.extend((m.start() + i, WEB_PERIOD) for i in _internal_dots(token))
        else:
            sites.extend((m.start() + i, NUMBER_PERIOD) for i in _decimal_dots(token))
    return sorted(sites)


def _protect(text: str) -> tuple[str, ProtectionMap]:
    pieces = []
    protections: ProtectionMap = []
    cursor = 0
    out_len = 0
    for pos, placeholder in _protection_sites(text):
        pieces.append(text[cursor:pos])
        out_len += pos - cursor
        protections.append(Protection(out_len, placeholder, "."))
        pieces.append(placeholder)
        out_len += len(placeholder)
        cursor = pos + 1
    pieces.append(text[cursor:])
    return "".join(pieces), protections


def preprocess_text(text: str) -> tuple[str, ProtectionMap]:
    """Apply the six cleaning rules in order; total and deterministic.

    Rules 1-4 normalize punctuation, rules 5-6 substitute placeholders and
    are the only ones recorded in the returned protection map.
    """
    text = _fix_quoted_periods(text)
    text = _ensure_termination(text)
    text = _collapse_periods(text)
    text = _standardize_question_marks(text)
    return _protect(text)


def restore_protected(text: str, protections: ProtectionMap) -> str:
    """Undo placeholder substitutions, newest (rightmost) first."""
    for placeholder in PLACEHOLDERS:
        expected = sum(1 for p in protections if p.placeholder == placeholder)
        found = text.count(placeholder)
        if expected != found:
            raise IntegrityError(
                f"{placeholder} occurs {found} time(s) but the map records {expected}"
            )
    for p in reversed(protections):
        if text[p.offset : p.offset + len(p.placeholder)] != p.placeholder:
            raise IntegrityError(
                f"expected {p.placeholder} at offset {p.offset}"
            )
        text = text[: p.offset] + p.original + text[p.offset + len(p.placeholder) :]
    return text


# --------------------------------------------------------------------------
# Sentence spans.

def split_sentences(clean: str) -> list[SentenceSpan]:
    """Split cleaned text on terminal periods.

    A span runs from the first non-whitespace character after the previous
    sentence through its period, plus any closing double quotes that follow
    the period. Placeholder tokens contain no periods and never split.
    """
    spans: list[SentenceSpan] = []
    n = len(clean)
    start = 0
    while start < n and clean[start].isspace():
        start += 1
    i = start
    while i < n:
        if clean[i] == ".":
            end = i + 1
            while end < n and clean[end] == '"':
                end += 1
            spans.append(SentenceSpan(len(spans), start, end, clean[start:end]))
            start = end
            while start < n and clean[start].isspace():
                start += 1
            i = start
        else:
            i += 1
    if start < n:
        # Defensive: un-terminated trailing fragment (cannot happen for
        # preprocess_text output) still becomes a span so coverage holds.
        end = n
        while end > start and clean[end - 1].isspace():
            end -= 1
        spans.append(SentenceSpan(len(spans), start, end, clean[start:end]))
    return spans


def clean_article(raw: RawArticle, budget: TokenBudget | None = None) -> CleanArticle:
    """Preprocess one article and split it into sentence spans."""
    text, protections = preprocess_text(raw.text)
    article = CleanArticle(raw.id, text, split_sentences(text), protections)
    if budget is not None:
        article = truncate_to_budget(article, budget)
    return article


def truncate_to_budget(article: CleanArticle, budget: TokenBudget) -> CleanArticle:
    """Keep the longest prefix of whole sentences within the token budget."""
    if budget.max_tokens < 1:
        raise ValidationError("max_tokens must be >= 1")
    try:
        counter = TOKEN_COUNTERS[budget.tokenizer_id]
    except KeyError:
        raise ValidationError(f"unknown tokenizer_id {budget.tokenizer_id!r}") from None

    kept = 0
    total = 0
    for span in article.sentences:
        total += counter(span.text)
        if total > budget.max_tokens:
            break
        kept += 1

    if kept == len(article.sentences):
        return article
    if kept == 0 and article.sentences:
        log.warning(
            "article %s: first sentence alone exceeds budget of %d tokens; keeping it",
            article.id,
            budget.max_tokens,
        )
        kept = 1

    sentences = article.sentences[:kept]
    cut = sentences[-1].char_end if sentences else 0
    protections = [
        p for p in article.protections if p.offset + len(p.placeholder) <= cut
    ]
    return CleanArticle(article.id, article.text[:cut], sentences, protections, True)


# --------------------------------------------------------------------------
# File I/O. Raw corpus: one {"id", "text"} record per line. Clean corpus adds
# spans, protections and the truncation flag.

def load_corpus(path: str | Path) -> list[RawArticle]:
    articles: list[RawArticle] = []
    seen: set[str] = set()
    for lineno, record in read_records(path):
        article_id = require(record, "id", lineno)
        text = require(record, "text", lineno)
        if not isinstance(article_id, str) or not article_id:
            raise ValidationError(f"line {lineno}: id must be a non-empty string")
        if not isinstance(text, str):
            raise ValidationError(f"line {lineno}: text must be a string")
        if article_id in seen:
            raise ValidationError(f"duplicate article id {article_id!r}")
        seen.add(article_id)
        articles.append(RawArticle(article_id, text))
    return articles


def clean_article_to_record(article: CleanArticle) -> dict:
    return {
        "id": article.id,
        "text": article.text,
        "spans": [
            {"index": s.index, "start": s.char_start, "end": s.char_end}
            for s in article.sentences
        ],
        "protections": [[p.offset, p.placeholder, p.original] for p in article.protections],
        "truncated": article.truncated,
    }


def clean_article_from_record(record: dict, lineno: int = 0) -> CleanArticle:
    text = require(record, "text", lineno)
    spans = [
        SentenceSpan(s["index"], s["start"], s["end"], text[s["start"] : s["end"]])
        for s in require(record, "spans", lineno)
    ]
    protections = [
        Protection(offset, placeholder, original)
        for offset, placeholder, original in record.get("protections", [])
    ]
    return CleanArticle(
        require(record, "id", lineno), text, spans, protections,
        bool(record.get("truncated", False)),
    )


def write_clean_corpus(path: str | Path, articles: list[CleanArticle]) -> None:
    write_records(path, [clean_article_to_record(a) for a in articles])


def load_clean_corpus(path: str | Path) -> list[CleanArticle]:
    articles = []
    seen: set[str] = set()
    for lineno, record in read_records(path):
        article = clean_article_from_record(record, lineno)
        if article.id in seen:
            raise ValidationError(f"duplicate article id {article.id!r}")
        seen.add(article.id)
        articles.append(article)
    return articles

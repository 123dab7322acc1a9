"""Shared builders for file-based end-to-end tests."""

import json

import numpy as np


def write_ndjson(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))


def planted_embedding_records(article_id, groups, dim=8, scale=0.01, rng=None):
    """Unit-norm vectors forming one tight blob per group of sentence indices."""
    rng = rng if rng is not None else np.random.default_rng(0)
    records = []
    for g, members in enumerate(groups):
        center = np.zeros(dim)
        center[g % dim] = 1.0
        for idx in members:
            vec = center + rng.normal(scale=scale, size=dim)
            vec = vec / np.linalg.norm(vec)
            records.append(
                {
                    "article_id": article_id,
                    "sentence_index": int(idx),
                    "vector": [float(v) for v in vec],
                }
            )
    return sorted(records, key=lambda r: (r["article_id"], r["sentence_index"]))


def make_cli_workspace(
    tmp_path,
    n_articles=4,
    n_sentences=6,
    methods=("attention", "deeplift"),
    seed=0,
):
    """Write raw articles, attributions and embeddings for CLI runs.

    Sentences per article are fixed and survive preprocessing unchanged, so
    sentence indices line up across all three files. Each article gets two
    planted embedding clusters (first half / second half of its sentences).
    """
    rng = np.random.default_rng(seed)
    articles_path = tmp_path / "articles.ndjson"
    attr_path = tmp_path / "attributions.ndjson"
    emb_path = tmp_path / "embeddings.ndjson"

    raw = []
    attr_records = []
    emb_records = []
    for i in range(n_articles):
        article_id = f"a{i}"
        text = " ".join(
            f"article {i} sentence {j} mentions various things." for j in range(n_sentences)
        )
        raw.append({"id": article_id, "text": text})
        for method in methods:
            attr_records.append(
                {
                    "article_id": article_id,
                    "method": method,
                    "sentence_scores": [float(s) for s in rng.normal(size=n_sentences)],
                }
            )
        half = n_sentences // 2
        groups = [list(range(half)), list(range(half, n_sentences))]
        emb_records.extend(planted_embedding_records(article_id, groups, rng=rng))

    write_ndjson(articles_path, raw)
    write_ndjson(attr_path, attr_records)
    write_ndjson(emb_path, emb_records)
    return {
        "articles": articles_path,
        "attributions": attr_path,
        "embeddings": emb_path,
    }

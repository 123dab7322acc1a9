# %% [markdown]
# # Does segmenting articles reduce explanation disagreement?
#
# Two attribution methods can rank sentences identically *inside* each topic
# of an article while disagreeing about which topic matters most. Analyzed
# whole ("global"), their top-k sets barely overlap; analyzed per semantic
# segment ("regional") and averaged back up, they agree. This demo plants
# exactly that structure and measures both ways.

# %%
import numpy as np

from xdis import AnalysisConfig, RawArticle, TokenBudget, clean_article, compare_reports
from xdis.attribution import AttributionStore, Explanation
from xdis.pipeline import run_global_analysis, run_regional_analysis
from xdis.segmentation import EmbeddingSet

rng = np.random.default_rng(7)
n_articles, n_sentences = 10, 8
half = n_sentences // 2

corpus, embeddings = [], {}
store = AttributionStore(methods=["attention", "deeplift"])
for i in range(n_articles):
    article = clean_article(
        RawArticle(f"a{i}", " ".join(f"story {i} sentence {j} text." for j in range(n_sentences)))
    )
    corpus.append(article)
    store.article_ids.append(article.id)

    # two planted topics; methods rank identically within each topic but
    # disagree about which topic dominates
    members = rng.permutation(n_sentences)
    topic_one, topic_two = sorted(members[:half]), sorted(members[half:])
    attention = np.zeros(n_sentences)
    deeplift = np.zeros(n_sentences)
    for rank, idx in enumerate(topic_one):
        attention[idx] = 100 - 10 * rank + rng.uniform(-1, 1)
        deeplift[idx] = 10 - rank + rng.uniform(-0.1, 0.1)
    for rank, idx in enumerate(topic_two):
        attention[idx] = 10 - rank + rng.uniform(-0.1, 0.1)
        deeplift[idx] = 100 - 10 * rank + rng.uniform(-1, 1)
    store.explanations[(article.id, "attention")] = Explanation(article.id, "attention", attention)
    store.explanations[(article.id, "deeplift")] = Explanation(article.id, "deeplift", deeplift)

    vectors = np.zeros((n_sentences, 8))
    for g, topic in enumerate((topic_one, topic_two)):
        for idx in topic:
            vectors[idx] = np.eye(8)[g] + rng.normal(scale=0.01, size=8)
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    embeddings[article.id] = EmbeddingSet(article.id, 8, vectors)

# %% [markdown]
# Same corpus, same explanations, same config; the only difference is the
# unit of analysis. Regional runs pick a per-article cluster count by
# silhouette, average it across the corpus for uniformity, segment, score
# each segment, then average segment -> article -> corpus.

# %%
config = AnalysisConfig(
    methods=["attention", "deeplift"],
    k_values=[2, 3],
    segment_source="slice_article_level",
    token_budget=TokenBudget(max_tokens=10_000),
    seed=0,
)
global_report = run_global_analysis(corpus, store, config)
regional_report = run_regional_analysis(corpus, store, embeddings, config)

comparison = compare_reports(global_report, regional_report)
print(f"{'metric':<24}{'k':>4}  {'global':>8}  {'regional':>8}  {'delta':>7}")
for row in comparison["rows"]:
    k = "-" if row["k"] is None else row["k"]
    print(
        f"{row['metric']:<24}{k:>4}  {row['global']:>8.3f}  "
        f"{row['regional']:>8.3f}  {row['delta']:>+7.3f}"
    )

# %% [markdown]
# On this planted structure every metric rises to 1.0 regionally: inside a
# segment the two methods order sentences identically, and the cross-topic
# disagreement that wrecked the global scores is never compared within one
# segment. Real corpora are messier; compare_reports flags any cell where the
# regional value actually came out lower.

# %% [markdown]
# # Four ways two explanations can disagree
#
# An explanation is one score per sentence. Two explanation methods can agree
# on *which* sentences matter while disagreeing on their exact order, so four
# metrics probe different aspects: top-k set overlap (feature agreement),
# top-k positional match (rank agreement), orderedness of all pairs (pairwise
# rank agreement), and full-ranking correlation (Spearman).

# %%
import numpy as np

from xdis import (
    feature_agreement,
    pairwise_rank_agreement,
    rank_agreement,
    spearman_rank_correlation,
    top_features,
)

method_a = np.array([0.91, -0.67, 0.12, 0.55, 0.08, -0.40])
method_b = np.array([0.80, -0.72, 0.05, 0.31, 0.22, -0.58])

print("top-3 of a:", top_features(method_a, 3))
print("top-3 of b:", top_features(method_b, 3))

# %% [markdown]
# Ranking is by score magnitude: a strongly negative sentence is as important
# as a strongly positive one. Ties break toward the lower sentence index, so
# every metric is deterministic and symmetric.

# %%
for k in (2, 3, 4):
    fa = feature_agreement(method_a, method_b, k)
    ra = rank_agreement(method_a, method_b, k)
    print(f"k={k}:  feature agreement {fa:.3f}   rank agreement {ra:.3f}")

print("pairwise rank agreement:", round(pairwise_rank_agreement(method_a, method_b), 3))
print("spearman correlation:   ", round(spearman_rank_correlation(method_a, method_b), 3))

# %% [markdown]
# Rank agreement can never exceed feature agreement: holding the same rank
# requires being in both top-k sets in the first place. And because all four
# metrics only consume magnitude ranks, rescaling either explanation by any
# positive constant changes nothing.

# %%
rng = np.random.default_rng(0)
for _ in range(5):
    a, b = rng.normal(size=8), rng.normal(size=8)
    assert rank_agreement(a, b, 4) <= feature_agreement(a, b, 4)
    assert feature_agreement(a * 37.0, b, 4) == feature_agreement(a, b, 4)
print("dominance and scale-invariance hold on random draws")

# %% [markdown]
# Averaged over a corpus, each (method, method) pair fills one cell of an
# agreement matrix; missing explanations and too-short articles are skipped
# and counted rather than silently treated as zeros.

# %%
from xdis.agreement import agreement_matrix
from xdis.attribution import AttributionStore, Explanation

store = AttributionStore(article_ids=["a0", "a1"], methods=["attention", "lime"])
store.explanations = {
    ("a0", "attention"): Explanation("a0", "attention", np.array([3.0, 1.0, 2.0])),
    ("a0", "lime"): Explanation("a0", "lime", np.array([3.0, 2.0, 1.0])),
    ("a1", "attention"): Explanation("a1", "attention", np.array([1.0, 5.0, 2.0])),
    ("a1", "lime"): Explanation("a1", "lime", np.array([1.0, 4.0, 3.0])),
}
matrix = agreement_matrix(store, "rank_agreement", 2, [("a0", None), ("a1", None)])
print("methods:", matrix.methods)
for row, counts in zip(matrix.values, matrix.counts):
    print([None if v is None else round(v, 3) for v in row], "counts", counts)

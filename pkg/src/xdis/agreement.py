"""Agreement metrics between pairs of explanations.

All four metrics are rank statistics over sentence importance. Importance
ordering uses score magnitude (a raw-score mode exists behind a flag), with
ties always broken toward the lower sentence index, which makes every metric
deterministic, reflexive and symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attribution import AttributionStore, Explanation, slice_to_segment
from .errors import RangeError, UndefinedMetricError, ValidationError

TOPK_METRICS = ("feature_agreement", "rank_agreement")
RELATIVE_METRICS = ("pairwise_rank_agreement", "spearman")
METRICS = TOPK_METRICS + RELATIVE_METRICS


def _scores(expl) -> np.ndarray:
    if isinstance(expl, Explanation):
        return expl.scores
    return np.asarray(expl, dtype=float)


def _pair(ea, eb) -> tuple[np.ndarray, np.ndarray]:
    a, b = _scores(ea), _scores(eb)
    if a.size != b.size:
        raise ValidationError(f"explanation lengths differ: {a.size} vs {b.size}")
    return a, b


def importance_order(scores, use_magnitude: bool = True) -> np.ndarray:
    """Feature indices from most to least important, index-ascending on ties."""
    key = np.abs(_scores(scores)) if use_magnitude else _scores(scores)
    return np.lexsort((np.arange(key.size), -key))


def _positions(scores, use_magnitude: bool) -> np.ndarray:
    order = importance_order(scores, use_magnitude)
    pos = np.empty(order.size, dtype=int)
    pos[order] = np.arange(order.size)
    return pos


def top_features(expl, k: int, use_magnitude: bool = True) -> list[int]:
    """The k most important feature indices, most important first."""
    scores = _scores(expl)
    if not 1 <= k <= scores.size:
        raise RangeError(f"k={k} outside [1, {scores.size}]")
    return importance_order(scores, use_magnitude)[:k].tolist()


def feature_agreement(ea, eb, k: int, use_magnitude: bool = True) -> float:
    """Fraction of features shared by the two top-k sets."""
    a, b = _pair(ea, eb)
    ta = set(top_features(a, k, use_magnitude))
    tb = set(top_features(b, k, use_magnitude))
    return len(ta & tb) / k


def rank_agreement(ea, eb, k: int, use_magnitude: bool = True) -> float:
    """Fraction of features in both top-k sets that also hold the same rank."""
    a, b = _pair(ea, eb)
    ta = top_features(a, k, use_magnitude)
    tb = top_features(b, k, use_magnitude)
    shared = set(ta) & set(tb)
    same = sum(1 for rank in range(k) if ta[rank] == tb[rank] and ta[rank] in shared)
    return same / k


def fractional_ranks(scores, use_magnitude: bool = True) -> np.ndarray:
    """Ranks starting at 1 for the most important feature; ties get the
    average of the ranks they straddle."""
    key = np.abs(_scores(scores)) if use_magnitude else _scores(scores)
    order = np.argsort(-key, kind="stable")
    ranks = np.empty(key.size)
    i = 0
    while i < key.size:
        j = i
        while j + 1 < key.size and key[order[j + 1]] == key[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman_rank_correlation(ea, eb, use_magnitude: bool = True) -> float:
    """Spearman's r over the full feature rankings of both explanations."""
    a, b = _pair(ea, eb)
    if a.size < 2:
        raise RangeError("need at least 2 features for rank correlation")
    ra = fractional_ranks(a, use_magnitude)
    rb = fractional_ranks(b, use_magnitude)
    da = ra - ra.mean()
    db = rb - rb.mean()
    denom = float(np.sqrt((da * da).sum() * (db * db).sum()))
    if denom == 0.0:
        raise UndefinedMetricError("rank correlation undefined for a constant ranking")
    return float((da * db).sum() / denom)


def pairwise_rank_agreement(ea, eb, use_magnitude: bool = True) -> float:
    """Fraction of feature pairs whose relative order matches."""
    a, b = _pair(ea, eb)
    n = a.size
    if n < 2:
        raise RangeError("need at least 2 features for pairwise rank agreement")
    pos_a = _positions(a, use_magnitude)
    pos_b = _positions(b, use_magnitude)
    iu = np.triu_indices(n, 1)
    less_a = pos_a[iu[0]] < pos_a[iu[1]]
    less_b = pos_b[iu[0]] < pos_b[iu[1]]
    return float(np.count_nonzero(less_a == less_b) / iu[0].size)


def compute_metric(
    metric: str, ea, eb, k: int | None = None, use_magnitude: bool = True
) -> float:
    if metric == "feature_agreement":
        return feature_agreement(ea, eb, k, use_magnitude)
    if metric == "rank_agreement":
        return rank_agreement(ea, eb, k, use_magnitude)
    if metric == "spearman":
        return spearman_rank_correlation(ea, eb, use_magnitude)
    if metric == "pairwise_rank_agreement":
        return pairwise_rank_agreement(ea, eb, use_magnitude)
    raise ValidationError(f"unknown metric {metric!r}")


# --------------------------------------------------------------------------
# Averaging over a corpus.

@dataclass
class AgreementMatrix:
    """Method-by-method grid of averaged agreement values for one metric
    (and one k for the top-k metrics). Missing cells are None, not 0."""

    metric: str
    k: int | None
    methods: list[str]
    values: list[list[float | None]]
    counts: list[list[int]]

    def value(self, method_a: str, method_b: str) -> float | None:
        i = self.methods.index(method_a)
        j = self.methods.index(method_b)
        return self.values[i][j]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "k": self.k,
            "methods": list(self.methods),
            "values": [list(row) for row in self.values],
            "counts": [list(row) for row in self.counts],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgreementMatrix":
        return cls(
            data["metric"],
            data["k"],
            list(data["methods"]),
            [list(row) for row in data["values"]],
            [list(row) for row in data["counts"]],
        )


Unit = tuple[str, list[int] | None]  # (article_id, optional segment indices)


def _unit_explanation(
    store: AttributionStore, article_id: str, segment: list[int] | None, method: str
) -> Explanation | None:
    expl = store.explanations.get((article_id, method))
    if expl is None or segment is None:
        return expl
    return slice_to_segment(expl, segment)


def agreement_matrix(
    store: AttributionStore,
    metric: str,
    k: int | None,
    units: list[Unit],
    methods: list[str] | None = None,
    use_magnitude: bool = True,
    per_unit: list | None = None,
    skips: list | None = None,
) -> AgreementMatrix:
    """Average a metric over analysis units for every method pair.

    A unit only contributes to a cell when both explanations exist and the
    metric's preconditions hold there; everything else is skipped and, when a
    collector list is supplied, recorded with a reason. Cells with no usable
    unit are marked missing.
    """
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}")
    if metric in TOPK_METRICS and (k is None or k < 1):
        raise ValidationError(f"{metric} requires a positive k")
    if metric in RELATIVE_METRICS:
        k = None
    if methods is None:
        methods = list(store.methods)

    m = len(methods)
    values: list[list[float | None]] = [[None] * m for _ in range(m)]
    counts = [[0] * m for _ in range(m)]

    for i in range(m):
        values[i][i] = 1.0
        counts[i][i] = sum(
            1 for article_id, _ in units if (article_id, methods[i]) in store.explanations
        )

    def record_skip(unit: Unit, mi: str, mj: str, reason: str) -> None:
        if skips is not None:
            article_id, segment = unit
            skips.append(
                {
                    "article_id": article_id,
                    "segment": segment,
                    "metric": metric,
                    "k": k,
                    "method_a": mi,
                    "method_b": mj,
                    "reason": reason,
                }
            )

    for i in range(m):
        for j in range(i + 1, m):
            cell: list[float] = []
            for unit in units:
                article_id, segment = unit
                ea = _unit_explanation(store, article_id, segment, methods[i])
                eb = _unit_explanation(store, article_id, segment, methods[j])
                if ea is None or eb is None:
                    absent = methods[i] if ea is None else methods[j]
                    record_skip(unit, methods[i], methods[j], f"missing explanation: {absent}")
                    continue
                try:
                    value = compute_metric(metric, ea, eb, k, use_magnitude)
                except RangeError:
                    record_skip(unit, methods[i], methods[j], "too few features")
                    continue
                except UndefinedMetricError:
                    record_skip(unit, methods[i], methods[j], "constant ranking")
                    continue
                cell.append(value)
                if per_unit is not None:
                    per_unit.append(
                        {
                            "article_id": article_id,
                            "segment": segment,
                            "metric": metric,
                            "k": k,
                            "method_a": methods[i],
                            "method_b": methods[j],
                            "value": value,
                        }
                    )
            if cell:
                values[i][j] = values[j][i] = float(np.mean(cell))
            counts[i][j] = counts[j][i] = len(cell)

    return AgreementMatrix(metric, k, list(methods), values, counts)

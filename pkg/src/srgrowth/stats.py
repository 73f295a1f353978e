"""Trend detection, nonparametric model comparison, and rank agreement.

The module answers three questions about fitted results:

* is there reliability growth at all (Laplace trend test),
* do the models differ in goodness of fit (Kruskal-Wallis with Dunn's
  pairwise follow-up, Bonferroni adjusted, plus an eta-squared effect size),
* do different project segments agree on the model ranking (a
  total-agreement percentage over rank ties across segments).

Everything here is exact arithmetic over small samples; tail probabilities
come from the in-repo incomplete gamma routines in :mod:`srgrowth.special`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InsufficientDataError, SegmentCoverageError
from .fitting import FitResult
from .models import MODEL_ORDER, ModelId
from .series import FailureSeries
from .special import chi2_sf, normal_sf

LAPLACE_CRITICAL = 1.96

GOF_METRICS = ("r2", "aic", "bic", "rse")
# R^2 ranks high-to-low; the information criteria and the residual standard
# error rank low-to-high.
_HIGHER_IS_BETTER = {"r2": True, "aic": False, "bic": False, "rse": False}

EFFECT_THRESHOLDS = (0.01, 0.06, 0.14)
EFFECT_LABELS = ("negligible", "small", "moderate", "large")


@dataclass(frozen=True)
class TrendResult:
    """Laplace factor of a failure series."""

    u: float
    n: int
    horizon: float
    growth_significant: bool


@dataclass(frozen=True)
class EffectSize:
    value: float
    label: str


@dataclass(frozen=True, eq=False)
class GroupComparison:
    group_labels: tuple[str, ...]
    group_values: tuple[tuple[float, ...], ...]
    H: float
    df: int
    p_value: float
    eta_squared: EffectSize
    dunn: np.ndarray


@dataclass(frozen=True)
class RankingTable:
    """Per-segment ranks of each model (1 = best mean metric).

    ``ranks[segment][model]`` is an integer rank; every row is a
    permutation of 1..len(models).  ``ira_percent`` is filled when the
    table has at least two segments.
    """

    segments: tuple[str, ...]
    models: tuple[ModelId, ...]
    metric: str
    ranks: dict[str, dict[ModelId, int]]
    ira_percent: float | None


def laplace_factor(series: FailureSeries) -> TrendResult:
    """Laplace trend factor u of a failure series.

    Negative u means the failure times concentrate early in the window,
    so the inter-failure gaps grow: reliability growth.  Growth counts as
    significant below the two-sided 5% point, u < -1.96.
    """
    t = series.times
    n = series.n
    horizon = series.horizon
    if n < 2:
        raise InsufficientDataError(f"Laplace factor needs n >= 2, got {n}")
    if horizon <= 0.0:
        raise InsufficientDataError("Laplace factor needs a positive horizon")
    u = (float(t.mean()) - horizon / 2.0) / (horizon * math.sqrt(1.0 / (12.0 * n)))
    return TrendResult(u=u, n=n, horizon=horizon, growth_significant=u < -LAPLACE_CRITICAL)


# ---------------------------------------------------------------------------
# rank machinery shared by Kruskal-Wallis and Dunn
# ---------------------------------------------------------------------------


def _pooled_ranks(groups: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    """Average ranks of the pooled sample and the tie parameter sum(t^3 - t)."""
    pooled = np.concatenate(groups)
    order = np.argsort(pooled, kind="mergesort")
    ranks = np.empty(pooled.size, dtype=float)
    sorted_vals = pooled[order]
    tie_sum = 0.0
    i = 0
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        run = j - i + 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        if run > 1:
            tie_sum += run**3 - run
        i = j + 1
    return ranks, tie_sum


def _validate_groups(groups) -> list[np.ndarray]:
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2:
        raise InsufficientDataError("need at least 2 groups")
    for g in arrays:
        if g.ndim != 1 or g.size == 0:
            raise InsufficientDataError("every group must be a nonempty 1-D sample")
        if not np.all(np.isfinite(g)):
            raise ValueError("group values must be finite")
    if sum(g.size for g in arrays) < 3:
        raise InsufficientDataError("need at least 3 observations in total")
    return arrays


def kruskal_wallis(groups: Sequence[Iterable[float]]) -> tuple[float, float]:
    """Kruskal-Wallis H and its chi-square p-value (df = k - 1).

    Uses average ranks for ties and the standard tie correction.  When all
    pooled values are identical the statistic degenerates to H = 0, p = 1.
    """
    arrays = _validate_groups(groups)
    ranks, tie_sum = _pooled_ranks(arrays)
    n_total = sum(g.size for g in arrays)
    correction = 1.0 - tie_sum / (n_total**3 - n_total)
    if correction == 0.0:
        return 0.0, 1.0
    h = -3.0 * (n_total + 1.0)
    offset = 0
    for g in arrays:
        rank_sum = float(ranks[offset : offset + g.size].sum())
        h += 12.0 / (n_total * (n_total + 1.0)) * rank_sum**2 / g.size
        offset += g.size
    h = max(h / correction, 0.0)
    return h, chi2_sf(h, len(arrays) - 1)


def dunn_posthoc(groups: Sequence[Iterable[float]]) -> np.ndarray:
    """Dunn's pairwise z-tests on mean ranks, Bonferroni adjusted.

    Returns a symmetric k x k matrix of adjusted two-sided p-values
    (diagonal 1).  The adjustment multiplies each raw p by the number of
    pairs k*(k-1)/2 and caps at 1.
    """
    arrays = _validate_groups(groups)
    k = len(arrays)
    ranks, tie_sum = _pooled_ranks(arrays)
    n_total = sum(g.size for g in arrays)
    tie_term = tie_sum / (12.0 * (n_total - 1.0))
    base_var = n_total * (n_total + 1.0) / 12.0 - tie_term

    mean_ranks = []
    offset = 0
    for g in arrays:
        mean_ranks.append(float(ranks[offset : offset + g.size].mean()))
        offset += g.size

    n_pairs = k * (k - 1) / 2.0
    out = np.ones((k, k), dtype=float)
    for i in range(k):
        for j in range(i + 1, k):
            variance = base_var * (1.0 / arrays[i].size + 1.0 / arrays[j].size)
            if variance <= 0.0:
                p_adj = 1.0
            else:
                z = (mean_ranks[i] - mean_ranks[j]) / math.sqrt(variance)
                p_adj = min(1.0, 2.0 * normal_sf(abs(z)) * n_pairs)
            out[i, j] = out[j, i] = p_adj
    return out


def eta_squared(h: float, k: int, n: int) -> EffectSize:
    """Eta-squared effect size of a Kruskal-Wallis result.

    eta^2 = (H - k + 1) / (n - k), labeled by the usual rule of thumb:
    small from 0.01, moderate from 0.06, large from 0.14 (values below
    0.01 are reported as negligible).
    """
    if k < 2:
        raise ValueError(f"eta_squared needs k >= 2 groups, got {k}")
    if n <= k:
        raise InsufficientDataError(f"eta_squared needs n > k, got n={n}, k={k}")
    value = (h - k + 1.0) / (n - k)
    label = EFFECT_LABELS[0]
    for threshold, name in zip(EFFECT_THRESHOLDS, EFFECT_LABELS[1:]):
        if value >= threshold:
            label = name
    return EffectSize(value=value, label=label)


def compare_groups(labels: Sequence[str], groups: Sequence[Iterable[float]]) -> GroupComparison:
    """Kruskal-Wallis plus Dunn's follow-up over named groups."""
    arrays = _validate_groups(groups)
    if len(labels) != len(arrays):
        raise ValueError("labels and groups must align")
    h, p = kruskal_wallis(arrays)
    k = len(arrays)
    n = sum(g.size for g in arrays)
    return GroupComparison(
        group_labels=tuple(str(x) for x in labels),
        group_values=tuple(tuple(float(v) for v in g) for g in arrays),
        H=h,
        df=k - 1,
        p_value=p,
        eta_squared=eta_squared(h, k, n),
        dunn=dunn_posthoc(arrays),
    )


# ---------------------------------------------------------------------------
# rankings across segments
# ---------------------------------------------------------------------------


def _metric_of(result: FitResult, metric: str) -> float:
    return getattr(result.gof, metric)


def rank_models(
    results: Mapping[str, Sequence[FitResult]], metric: str = "r2"
) -> RankingTable:
    """Rank models within each segment by their mean metric value.

    Rank 1 is the best mean (highest for r2, lowest for aic/bic/rse).
    Ties break by model id, alphabetically.  Every segment must contribute
    at least one finite value for every ranked model; a gap raises
    ``SegmentCoverageError`` naming the model and segment.
    """
    metric = metric.lower()
    if metric not in GOF_METRICS:
        raise ValueError(f"metric must be one of {GOF_METRICS}, got {metric!r}")
    if not results:
        raise InsufficientDataError("no segments to rank")

    segments = tuple(results.keys())
    model_set: set[ModelId] = set()
    for seg_results in results.values():
        model_set.update(r.model for r in seg_results)
    if not model_set:
        raise InsufficientDataError("no fit results to rank")
    models = tuple(m for m in MODEL_ORDER if m in model_set)

    means: dict[str, dict[ModelId, float]] = {}
    for segment in segments:
        seg_means: dict[ModelId, float] = {}
        for model in models:
            values = [
                _metric_of(r, metric)
                for r in results[segment]
                if r.model == model and math.isfinite(_metric_of(r, metric))
            ]
            if not values:
                raise SegmentCoverageError(
                    f"model {model} has no finite {metric} values in segment {segment!r}"
                )
            seg_means[model] = sum(values) / len(values)
        means[segment] = seg_means

    higher = _HIGHER_IS_BETTER[metric]
    ranks: dict[str, dict[ModelId, int]] = {}
    for segment in segments:
        ordered = sorted(
            models,
            key=lambda m: (
                -means[segment][m] if higher else means[segment][m],
                m.value,
            ),
        )
        ranks[segment] = {model: i + 1 for i, model in enumerate(ordered)}

    table = RankingTable(
        segments=segments, models=models, metric=metric, ranks=ranks, ira_percent=None
    )
    if len(segments) >= 2:
        table = RankingTable(
            segments=segments,
            models=models,
            metric=metric,
            ranks=ranks,
            ira_percent=inter_rater_agreement(table),
        )
    return table


def inter_rater_agreement(table: RankingTable) -> float:
    """Percentage of total agreement between segment rankings.

    Treats each segment as a rater.  For every model and every unordered
    pair of segments, the cell agrees when both segments assign the model
    the same rank.  The result is agreeing cells over all such cells,
    / (models * segment pairs), as a percentage.
    """
    r = len(table.segments)
    if r < 2:
        raise InsufficientDataError("agreement needs at least two segments")
    n_pairs = r * (r - 1) // 2
    agreements = 0
    for model in table.models:
        for i in range(r):
            for j in range(i + 1, r):
                a = table.ranks[table.segments[i]][model]
                b = table.ranks[table.segments[j]][model]
                if a == b:
                    agreements += 1
    return 100.0 * agreements / (len(table.models) * n_pairs)

"""Report serialization: CSV and JSON writers plus readers for fit outputs.

Numbers are printed with 17 significant digits, enough for float64 values
to round-trip exactly, so downstream commands reading a fit directory see
bit-identical values and repeated runs with the same seed produce
byte-identical files.  CSVs follow RFC 4180 (comma separated, CRLF, minimal
quoting) in UTF-8.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .fitting import FitResult, GofScores
from .models import ModelId
from .series import FailureSeries
from .stats import EFFECT_THRESHOLDS, GroupComparison, RankingTable, TrendResult

GOF_COLUMNS = ("series", "model", "a", "b", "c", "rss", "r2", "aic", "bic", "rse", "converged")
TREND_COLUMNS = ("series", "n", "horizon_days", "laplace_u", "growth_significant")

# How the ambiguous formulas are computed in this tool; recorded in every
# run's metadata so reports are self-describing.
FORMULA_VARIANTS = {
    "aic": "n*ln(max(rss,1e-12)/n) + 2*(k+1)",
    "bic": "n*ln(max(rss,1e-12)/n) + (k+1)*ln(n)",
    "rse": "sqrt(rss/(n-k))",
    "r2": "1 - ss_res/ss_tot",
    "laplace": "u = (mean(t) - T/2)/(T*sqrt(1/(12n))); growth significant when u < -1.96",
    "kruskal_wallis": "average ranks with tie correction; p from chi-square, df=k-1",
    "dunn": "z on mean ranks with tie term; two-sided p * k(k-1)/2, capped at 1",
    "eta_squared": "(H - k + 1)/(n - k); labels negligible/small/moderate/large at 0.01/0.06/0.14",
    "inter_rater_agreement": (
        "agreeing (model, segment-pair) rank cells / (models * segment pairs) * 100"
    ),
    "initial_search": "best RSS of log-uniform draws within bounds, seeded",
    "refine": "damped Gauss-Newton with analytic Jacobian, steps projected to bounds",
}

EFFECT_LEGEND = (
    f"eta^2 labels: negligible < {EFFECT_THRESHOLDS[0]}, "
    f"small >= {EFFECT_THRESHOLDS[0]}, moderate >= {EFFECT_THRESHOLDS[1]}, "
    f"large >= {EFFECT_THRESHOLDS[2]}"
)


def fmt_float(value: float | None) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def slugify(label: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_")
    return slug or "series"


def unique_slugs(labels: Sequence[str]) -> dict[str, str]:
    """Deterministic filename-safe slugs, disambiguated on collision."""
    out: dict[str, str] = {}
    used: set[str] = set()
    for label in labels:
        base = slugify(label)
        slug = base
        counter = 2
        while slug in used:
            slug = f"{base}-{counter}"
            counter += 1
        used.add(slug)
        out[label] = slug
    return out


def _open_csv(path: Path):
    return open(path, "w", newline="", encoding="utf-8")


# ---------------------------------------------------------------------------
# fit outputs
# ---------------------------------------------------------------------------


def write_gof_csv(path: Path, rows: Iterable[tuple[str, FitResult]]) -> None:
    """One row per (series, model): parameters in positional columns a, b, c."""
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(GOF_COLUMNS)
        for label, result in rows:
            params = list(result.params) + [None] * (3 - len(result.params))
            writer.writerow(
                [
                    label,
                    str(result.model),
                    fmt_float(params[0]),
                    fmt_float(params[1]),
                    fmt_float(params[2]),
                    fmt_float(result.rss),
                    fmt_float(result.gof.r2),
                    fmt_float(result.gof.aic),
                    fmt_float(result.gof.bic),
                    fmt_float(result.gof.rse),
                    fmt_bool(result.converged),
                ]
            )


def read_gof_csv(path: Path, n_by_series: dict[str, int] | None = None) -> list[tuple[str, FitResult]]:
    """Read a gof.csv back into (series, FitResult) pairs.

    The observation count is not part of the table; it is restored from
    ``n_by_series`` (as recorded in run metadata) and defaults to 0.
    """
    out: list[tuple[str, FitResult]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = set(GOF_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            params = tuple(float(row[c]) for c in ("a", "b", "c") if row[c] != "")
            label = row["series"]
            n = (n_by_series or {}).get(label, 0)
            result = FitResult(
                model=ModelId(row["model"]),
                params=params,
                rss=float(row["rss"]),
                n=n,
                k=len(params),
                converged=row["converged"] == "true",
                iterations_used=0,
                gof=GofScores(
                    r2=float(row["r2"]),
                    aic=float(row["aic"]),
                    bic=float(row["bic"]),
                    rse=float(row["rse"]),
                ),
            )
            out.append((label, result))
    return out


def write_curve_csv(
    path: Path,
    series: FailureSeries,
    results: Sequence[FitResult],
    fitted_columns: Sequence[Sequence[float] | None],
) -> None:
    """Observed cumulative counts and each model's fitted curve at the
    observation times."""
    observed = series.cumulative
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "observed"] + [str(r.model) for r in results])
        for i, t in enumerate(series.times):
            row = [fmt_float(t), fmt_float(observed[i])]
            for fitted in fitted_columns:
                row.append("" if fitted is None else fmt_float(fitted[i]))
            writer.writerow(row)


def write_trend_csv(path: Path, rows: Iterable[tuple[str, TrendResult]]) -> None:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(TREND_COLUMNS)
        for label, trend in rows:
            writer.writerow(
                [
                    label,
                    str(trend.n),
                    fmt_float(trend.horizon),
                    fmt_float(trend.u),
                    fmt_bool(trend.growth_significant),
                ]
            )


def write_segments_csv(path: Path, assignments: Iterable[tuple[str, str]]) -> None:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["series", "segment"])
        for series, segment in assignments:
            writer.writerow([series, segment])


def read_segments_csv(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            out[row["series"]] = row["segment"]
    return out


def write_skipped_csv(path: Path, rows: Iterable[tuple[str, str]]) -> None:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["name", "reason"])
        for name, reason in rows:
            writer.writerow([name, reason])


# ---------------------------------------------------------------------------
# comparison and ranking outputs
# ---------------------------------------------------------------------------


def write_comparison_csv(path: Path, rows: Iterable[dict]) -> None:
    columns = ("segment", "metric", "k", "n", "H", "df", "p_value", "eta_squared", "effect")
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    row["segment"],
                    row["metric"],
                    str(row["k"]),
                    str(row["n"]),
                    fmt_float(row["H"]),
                    str(row["df"]),
                    fmt_float(row["p_value"]),
                    fmt_float(row["eta_squared"]),
                    row["effect"],
                ]
            )


def write_dunn_csv(path: Path, rows: Iterable[tuple[str, str, str, float]]) -> None:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["segment", "model_a", "model_b", "p_adj"])
        for segment, a, b, p in rows:
            writer.writerow([segment, a, b, fmt_float(p)])


def write_summary_csv(path: Path, rows: Iterable[dict]) -> None:
    columns = ["segment", "model", "n"]
    for metric in ("r2", "aic", "bic", "rse"):
        columns += [f"{metric}_mean", f"{metric}_sd"]
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            record = [row["segment"], row["model"], str(row["n"])]
            for metric in ("r2", "aic", "bic", "rse"):
                record.append(fmt_float(row[f"{metric}_mean"]))
                sd = row[f"{metric}_sd"]
                record.append("" if sd is None else fmt_float(sd))
            writer.writerow(record)


def write_ranking_csv(path: Path, table: RankingTable) -> None:
    """Rows are models ordered best-first by mean rank across segments."""

    def mean_rank(model: ModelId) -> float:
        return sum(table.ranks[s][model] for s in table.segments) / len(table.segments)

    ordered = sorted(table.models, key=lambda m: (mean_rank(m), m.value))
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["model"] + list(table.segments))
        for model in ordered:
            writer.writerow([str(model)] + [str(table.ranks[s][model]) for s in table.segments])


def comparison_to_dict(segment: str, metric: str, comparison: GroupComparison) -> dict:
    dunn_rows = []
    labels = comparison.group_labels
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            dunn_rows.append(
                {
                    "model_a": labels[i],
                    "model_b": labels[j],
                    "p_adj": float(comparison.dunn[i, j]),
                }
            )
    return {
        "segment": segment,
        "metric": metric,
        "groups": {
            label: list(values)
            for label, values in zip(comparison.group_labels, comparison.group_values)
        },
        "H": comparison.H,
        "df": comparison.df,
        "p_value": comparison.p_value,
        "eta_squared": comparison.eta_squared.value,
        "effect": comparison.eta_squared.label,
        "dunn": dunn_rows,
    }


# ---------------------------------------------------------------------------
# metadata and JSON bundles
# ---------------------------------------------------------------------------


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    path.write_text(text + "\n", encoding="utf-8")


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def base_metadata(command: str) -> dict:
    return {
        "tool": "srgrowth",
        "version": __version__,
        "command": command,
        "variants": dict(FORMULA_VARIANTS),
    }

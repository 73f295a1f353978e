"""Command line interface.

Verbs:

* ``ingest``   parse raw issue exports (or fetch from the tracker), keep
  defect-labeled issues, write normalized newline-delimited JSON.
* ``trend``    Laplace trend test per series.
* ``fit``      fit the model zoo to each series, write goodness-of-fit and
  curve tables.
* ``compare``  Kruskal-Wallis + Dunn comparison of the models' metric
  distributions across fitted series.
* ``rank``     per-segment model rankings and their agreement.

Exit codes: 0 on success, 2 for input errors (unreadable or malformed
inputs, unknown repository, usage), 3 when inputs parse but violate an
analysis precondition (too few series, missing coverage, no data in
window).  Given the same inputs and seed, repeated runs write
byte-identical output trees.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    AnalysisError,
    EmptySeriesError,
    InputError,
    InsufficientDataError,
    SegmentCoverageError,
)
from .fitting import FitConfig, fit_all
from .models import _MEAN, MODEL_ORDER, ModelId, descriptor
from .pipeline import (
    DEFAULT_MIN_FAULTS,
    build_series,
    classify_attribute,
    fetch_issues,
    filter_defects,
    issue_to_json,
    load_attributes_csv,
    load_releases_csv,
    parse_issues,
    segment_releases,
)
from .reporting import (
    EFFECT_LEGEND,
    base_metadata,
    comparison_to_dict,
    read_gof_csv,
    read_json,
    read_segments_csv,
    unique_slugs,
    write_comparison_csv,
    write_curve_csv,
    write_dunn_csv,
    write_gof_csv,
    write_json,
    write_ranking_csv,
    write_segments_csv,
    write_skipped_csv,
    write_summary_csv,
    write_trend_csv,
)
from .series import FailureSeries
from .stats import GOF_METRICS, compare_groups, laplace_factor, rank_models

GROUPINGS = (
    "whole",
    "releases",
    "domain",
    "attribute:LOC",
    "attribute:NOC",
    "attribute:NOI",
    "attribute:NOFA",
)

TOKEN_ENV_VARS = ("SRGROWTH_TOKEN", "GITHUB_TOKEN")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srgrowth",
        description="Reliability growth analysis over issue-tracker defect data.",
    )
    parser.add_argument("--version", action="version", version=f"srgrowth {__version__}")
    sub = parser.add_subparsers(dest="verb")

    ingest = sub.add_parser("ingest", help="normalize raw issue exports to defect NDJSON")
    ingest.add_argument("--issues", nargs="*", default=[], help="raw issue JSON/NDJSON files")
    ingest.add_argument("--repo", help="owner/name to fetch from the tracker instead")
    ingest.add_argument("--token", help="tracker API token (or set SRGROWTH_TOKEN / GITHUB_TOKEN)")
    ingest.add_argument(
        "--title-match",
        action="store_true",
        help="also match defect keywords in issue titles",
    )
    ingest.add_argument("--out", required=True, help="output directory")
    ingest.add_argument("--format", default="csv", help="extra output formats (csv,json)")
    ingest.set_defaults(func=cmd_ingest)

    for name, func in (("trend", cmd_trend), ("fit", cmd_fit)):
        cmd = sub.add_parser(
            name,
            help="Laplace trend test per series" if name == "trend" else "fit the model zoo per series",
        )
        cmd.add_argument("--issues", nargs="+", required=True, help="normalized issue files, one per project")
        cmd.add_argument("--releases", help="release windows CSV (name,start,end)")
        cmd.add_argument("--attributes", help="project attributes CSV (project,category,loc,noc,noi,nofa)")
        cmd.add_argument("--group-by", default="whole", choices=GROUPINGS, dest="group_by")
        cmd.add_argument(
            "--min-faults",
            type=int,
            default=DEFAULT_MIN_FAULTS,
            dest="min_faults",
            help="drop release windows with fewer faults (default 20)",
        )
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--format", default="csv", help="extra output formats (csv,json)")
        if name == "fit":
            cmd.add_argument("--models", help="comma-separated model ids (default: all nine)")
            cmd.add_argument("--seed", type=int, default=0, help="random seed for the initial search")
            cmd.add_argument("--budget", type=int, default=100_000, help="initial search candidates per model")
        cmd.set_defaults(func=func)

    compare = sub.add_parser("compare", help="Kruskal-Wallis + Dunn across models")
    compare.add_argument("--fits", nargs="+", required=True, help="fit output directories")
    compare.add_argument("--metric", default="r2", choices=GOF_METRICS)
    compare.add_argument("--out", required=True)
    compare.add_argument("--format", default="csv", help="extra output formats (csv,json)")
    compare.set_defaults(func=cmd_compare)

    rank = sub.add_parser("rank", help="per-segment model rankings and agreement")
    rank.add_argument(
        "--fits",
        nargs="+",
        required=True,
        help="fit output directories, optionally labeled as SEGMENT=DIR",
    )
    rank.add_argument("--metric", default="r2", choices=GOF_METRICS)
    rank.add_argument("--out", required=True)
    rank.add_argument("--format", default="csv", help="extra output formats (csv,json)")
    rank.set_defaults(func=cmd_rank)

    return parser


def _parse_formats(raw: str) -> set[str]:
    formats = {part.strip().lower() for part in raw.split(",") if part.strip()}
    unknown = formats - {"csv", "json"}
    if unknown:
        raise ValueError(f"unknown output formats {sorted(unknown)}; choose from csv,json")
    return formats


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    formats = _parse_formats(args.format)
    out = _out_dir(args)
    if not args.issues and not args.repo:
        raise ValueError("ingest needs --issues files or --repo")

    summary: dict[str, dict] = {}
    sources: list[tuple[str, object]] = [(Path(p).stem, Path(p)) for p in args.issues]
    if args.repo:
        token = args.token
        for env_var in TOKEN_ENV_VARS:
            if token:
                break
            token = os.environ.get(env_var)
        sources.append((args.repo.replace("/", "_"), (args.repo, token)))

    for stem, source in sources:
        if isinstance(source, Path):
            parsed = parse_issues(source.read_bytes())
            records, skipped = parsed.records, parsed.skipped
        else:
            slug, token = source
            records, skipped = fetch_issues(slug, auth_token=token), []

        matched = filter_defects(records, exclusions=frozenset(), include_title=args.title_match)
        kept = filter_defects(records, include_title=args.title_match)
        target = out / f"{stem}.ndjson"
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            for record in kept:
                handle.write(json.dumps(issue_to_json(record), sort_keys=True) + "\n")

        summary[stem] = {
            "total": len(records),
            "parse_skipped": len(skipped),
            "parse_skip_notes": skipped,
            "defect_matched": len(matched),
            "excluded": len(matched) - len(kept),
            "kept": len(kept),
            "output": target.name,
        }
        print(
            f"{stem}: total={len(records)} defect_matched={len(matched)} "
            f"excluded={len(matched) - len(kept)} kept={len(kept)}"
        )

    meta = base_metadata("ingest")
    meta["title_match"] = bool(args.title_match)
    meta["inputs"] = summary
    write_json(out / "summary.json", meta)
    if "json" in formats:
        write_json(out / "report.json", {"metadata": meta})
    return 0


# ---------------------------------------------------------------------------
# shared series construction for trend and fit
# ---------------------------------------------------------------------------


def _load_projects(paths) -> list[tuple[str, list]]:
    projects = []
    for path in paths:
        parsed = parse_issues(Path(path).read_bytes())
        projects.append((Path(path).stem, parsed.records))
    return projects


def _grouped_series(args) -> tuple[list[FailureSeries], dict[str, str], list[tuple[str, str]]]:
    """Series per the grouping mode, segment labels, and skip notes."""
    projects = _load_projects(args.issues)
    grouping = args.group_by
    series: list[FailureSeries] = []
    segments: dict[str, str] = {}
    skipped: list[tuple[str, str]] = []

    if grouping == "releases":
        if not args.releases:
            raise ValueError("--group-by releases needs --releases")
        windows = load_releases_csv(args.releases)
        for project, records in projects:
            outcome = segment_releases(records, windows, min_faults=args.min_faults)
            for s in outcome.series:
                label = f"{project}:{s.label}"
                series.append(
                    FailureSeries(times=s.times, horizon=s.horizon, label=label)
                )
            for name, count in outcome.dropped:
                skipped.append((f"{project}:{name}", f"only {count} faults (min {args.min_faults})"))
        return series, segments, skipped

    attributes = None
    if grouping == "domain" or grouping.startswith("attribute:"):
        if not args.attributes:
            raise ValueError(f"--group-by {grouping} needs --attributes")
        attributes = load_attributes_csv(args.attributes)

    for project, records in projects:
        try:
            s = build_series(records, label=project)
        except EmptySeriesError:
            skipped.append((project, "no issues"))
            continue
        if attributes is not None:
            if project not in attributes:
                raise SegmentCoverageError(
                    f"attributes file has no row for project {project!r}"
                )
            attrs = attributes[project]
            if grouping == "domain":
                segments[project] = attrs.category
            else:
                metric = grouping.split(":", 1)[1]
                segments[project] = classify_attribute(metric, attrs.metric(metric))
        series.append(s)
    return series, segments, skipped


# ---------------------------------------------------------------------------
# trend
# ---------------------------------------------------------------------------


def cmd_trend(args) -> int:
    formats = _parse_formats(args.format)
    out = _out_dir(args)
    series, segments, skipped = _grouped_series(args)

    rows = []
    for s in series:
        if s.n < 2:
            skipped.append((s.label, f"only {s.n} observations; trend needs 2"))
            continue
        rows.append((s.label, laplace_factor(s)))
    if not rows:
        raise InsufficientDataError("no series with enough observations for the trend test")

    write_trend_csv(out / "trend.csv", rows)
    if segments:
        write_segments_csv(out / "segments.csv", sorted(segments.items()))
    write_skipped_csv(out / "skipped.csv", skipped)

    meta = base_metadata("trend")
    meta.update(
        {
            "grouping": args.group_by,
            "min_faults": args.min_faults,
            "series": {
                label: {"n": trend.n, "segment": segments.get(label.split(":", 1)[0], "all")}
                for label, trend in rows
            },
        }
    )
    write_json(out / "run_metadata.json", meta)
    if "json" in formats:
        write_json(
            out / "report.json",
            {
                "metadata": meta,
                "trend": [
                    {
                        "series": label,
                        "n": t.n,
                        "horizon_days": t.horizon,
                        "laplace_u": t.u,
                        "growth_significant": t.growth_significant,
                    }
                    for label, t in rows
                ],
                "skipped": [{"name": n, "reason": r} for n, r in skipped],
            },
        )
    for label, trend in rows:
        flag = "growth" if trend.growth_significant else "no significant growth"
        print(f"{label}: u={trend.u:.4f} ({flag})")
    return 0


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _parse_models(raw: str | None) -> list[ModelId]:
    if not raw:
        return list(MODEL_ORDER)
    models = []
    for part in raw.split(","):
        name = part.strip().upper()
        if not name:
            continue
        try:
            models.append(ModelId(name))
        except ValueError:
            raise ValueError(
                f"unknown model {part.strip()!r}; choose from "
                f"{','.join(m.value for m in MODEL_ORDER)}"
            ) from None
    if not models:
        raise ValueError("empty model list")
    return [m for m in MODEL_ORDER if m in set(models)]


def cmd_fit(args) -> int:
    formats = _parse_formats(args.format)
    out = _out_dir(args)
    models = _parse_models(args.models)
    cfg = FitConfig(search_budget=args.budget, rng_seed=args.seed)
    series, segments, skipped = _grouped_series(args)

    fit_min = min(descriptor(m).k for m in models) + 1
    fitted_series = []
    for s in series:
        if s.n < fit_min:
            skipped.append((s.label, f"only {s.n} observations; fitting needs {fit_min}"))
            continue
        fitted_series.append(s)
    if not fitted_series:
        raise InsufficientDataError("no series with enough observations to fit")

    slugs = unique_slugs([s.label for s in fitted_series])
    curves_dir = out / "curves"
    curves_dir.mkdir(parents=True, exist_ok=True)

    gof_rows = []
    trend_rows = []
    series_meta = {}
    for s in fitted_series:
        trend_rows.append((s.label, laplace_factor(s)))
        results = fit_all(s, models, cfg)
        fitted_columns = []
        for result in results:
            if all(math.isfinite(v) for v in result.params):
                fitted_columns.append(
                    np.asarray(_MEAN[result.model](np.asarray(result.params), s.times))
                )
            else:
                fitted_columns.append(None)
        write_curve_csv(curves_dir / f"{slugs[s.label]}.csv", s, results, fitted_columns)
        gof_rows.extend((s.label, r) for r in results)
        segment = segments.get(s.label.split(":", 1)[0])
        series_meta[s.label] = {
            "n": s.n,
            "segment": segment if segment is not None else "all",
            "curve": f"curves/{slugs[s.label]}.csv",
        }

    write_gof_csv(out / "gof.csv", gof_rows)
    write_trend_csv(out / "trend.csv", trend_rows)
    write_skipped_csv(out / "skipped.csv", skipped)
    if segments:
        write_segments_csv(
            out / "segments.csv",
            [(s.label, series_meta[s.label]["segment"]) for s in fitted_series],
        )

    meta = base_metadata("fit")
    meta.update(
        {
            "seed": args.seed,
            "budget": args.budget,
            "models": [m.value for m in models],
            "grouping": args.group_by,
            "min_faults": args.min_faults,
            "series": series_meta,
        }
    )
    write_json(out / "run_metadata.json", meta)

    if "json" in formats:
        write_json(
            out / "report.json",
            {
                "metadata": meta,
                "gof": [
                    {
                        "series": label,
                        "model": r.model.value,
                        "params": list(r.params),
                        "rss": r.rss,
                        "r2": r.gof.r2,
                        "aic": r.gof.aic,
                        "bic": r.gof.bic,
                        "rse": r.gof.rse,
                        "converged": r.converged,
                        "iterations_used": r.iterations_used,
                    }
                    for label, r in gof_rows
                ],
                "trend": [
                    {
                        "series": label,
                        "n": t.n,
                        "horizon_days": t.horizon,
                        "laplace_u": t.u,
                        "growth_significant": t.growth_significant,
                    }
                    for label, t in trend_rows
                ],
                "skipped": [{"name": n, "reason": r} for n, r in skipped],
            },
        )

    print(
        f"fitted {len(models)} models to {len(fitted_series)} series "
        f"({len(skipped)} skipped) -> {out}"
    )
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _read_fit_dir(path: Path) -> tuple[list[tuple[str, object]], dict[str, str]]:
    gof_path = path / "gof.csv"
    if not gof_path.exists():
        raise ValueError(f"{path} is not a fit output directory (no gof.csv)")
    n_by_series: dict[str, int] = {}
    segment_by_series: dict[str, str] = {}
    meta_path = path / "run_metadata.json"
    if meta_path.exists():
        meta = read_json(meta_path)
        for label, info in meta.get("series", {}).items():
            n_by_series[label] = int(info.get("n", 0))
            segment_by_series[label] = str(info.get("segment", "all"))
    segments_path = path / "segments.csv"
    if segments_path.exists():
        segment_by_series.update(read_segments_csv(segments_path))
    rows = read_gof_csv(gof_path, n_by_series)
    return rows, segment_by_series


def cmd_compare(args) -> int:
    formats = _parse_formats(args.format)
    out = _out_dir(args)
    metric = args.metric

    pooled: list[tuple[str, str, object]] = []
    for fits in args.fits:
        rows, segment_by_series = _read_fit_dir(Path(fits))
        for label, result in rows:
            segment = segment_by_series.get(label, "all")
            pooled.append((segment, label, result))
    if not pooled:
        raise InsufficientDataError("fit outputs contain no results")

    segment_names = sorted({segment for segment, _, _ in pooled})
    comparison_rows = []
    dunn_rows = []
    summary_rows = []
    report_comparisons = []
    for segment in segment_names:
        rows = [(label, r) for seg, label, r in pooled if seg == segment]
        by_model: dict[ModelId, list[float]] = {}
        for _, result in rows:
            value = getattr(result.gof, metric)
            if math.isfinite(value):
                by_model.setdefault(result.model, []).append(value)
        models = [m for m in MODEL_ORDER if m in by_model]
        if len(models) < 2:
            raise InsufficientDataError(
                f"segment {segment!r} has {metric} values for {len(models)} model(s); "
                "comparison needs at least 2 groups"
            )
        groups = [by_model[m] for m in models]
        n_total = sum(len(g) for g in groups)
        if n_total <= len(models):
            raise InsufficientDataError(
                f"segment {segment!r} has {n_total} values across {len(models)} models; "
                "comparison needs more series than models"
            )
        comparison = compare_groups([m.value for m in models], groups)
        comparison_rows.append(
            {
                "segment": segment,
                "metric": metric,
                "k": len(models),
                "n": n_total,
                "H": comparison.H,
                "df": comparison.df,
                "p_value": comparison.p_value,
                "eta_squared": comparison.eta_squared.value,
                "effect": comparison.eta_squared.label,
            }
        )
        for i in range(len(models)):
            for j in range(i + 1, len(models)):
                dunn_rows.append(
                    (segment, models[i].value, models[j].value, float(comparison.dunn[i, j]))
                )
        for model in models:
            row = {"segment": segment, "model": model.value, "n": len(by_model[model])}
            model_results = [r for _, r in rows if r.model == model]
            for name in GOF_METRICS:
                values = [
                    getattr(r.gof, name)
                    for r in model_results
                    if math.isfinite(getattr(r.gof, name))
                ]
                row[f"{name}_mean"] = sum(values) / len(values) if values else None
                row[f"{name}_sd"] = (
                    float(np.std(values, ddof=1)) if len(values) >= 2 else None
                )
            summary_rows.append(row)
        report_comparisons.append(comparison_to_dict(segment, metric, comparison))

    write_comparison_csv(out / "comparison.csv", comparison_rows)
    write_dunn_csv(out / "dunn.csv", dunn_rows)
    write_summary_csv(out / "summary.csv", summary_rows)

    meta = base_metadata("compare")
    meta.update({"metric": metric, "effect_legend": EFFECT_LEGEND, "segments": segment_names})
    write_json(out / "run_metadata.json", meta)
    if "json" in formats:
        write_json(out / "report.json", {"metadata": meta, "comparisons": report_comparisons})

    for row in comparison_rows:
        print(
            f"{row['segment']}: H={row['H']:.6f} df={row['df']} p={row['p_value']:.6g} "
            f"eta2={row['eta_squared']:.6f} ({row['effect']})"
        )
    return 0


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------


def cmd_rank(args) -> int:
    formats = _parse_formats(args.format)
    out = _out_dir(args)

    groups: dict[str, list] = {}
    for spec in args.fits:
        forced_label = None
        path_text = spec
        if "=" in spec and not Path(spec).exists():
            forced_label, path_text = spec.split("=", 1)
        path = Path(path_text)
        rows, segment_by_series = _read_fit_dir(path)
        for label, result in rows:
            segment = forced_label or segment_by_series.get(label) or path.name
            groups.setdefault(segment, []).append(result)

    table = rank_models(groups, args.metric)
    write_ranking_csv(out / "ranking.csv", table)

    meta = base_metadata("rank")
    meta.update(
        {
            "metric": args.metric,
            "segments": list(table.segments),
            "models": [m.value for m in table.models],
            "ira_percent": table.ira_percent,
        }
    )
    write_json(out / "run_metadata.json", meta)
    if "json" in formats:
        write_json(
            out / "report.json",
            {
                "metadata": meta,
                "ranks": {
                    segment: {m.value: table.ranks[segment][m] for m in table.models}
                    for segment in table.segments
                },
            },
        )

    for segment in table.segments:
        ordered = sorted(table.models, key=lambda m: table.ranks[segment][m])
        print(f"{segment}: " + " > ".join(m.value for m in ordered))
    if table.ira_percent is not None:
        print(f"inter-segment agreement: {table.ira_percent:.2f}%")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

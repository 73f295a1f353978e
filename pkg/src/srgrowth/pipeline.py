"""Issue mining: parse, fetch, filter, and turn issues into failure series.

The pipeline turns issue-tracker exports (or the live REST listing) into
the ``FailureSeries`` objects the fit engine consumes:

    parse_issues -> filter_defects -> build_series / segment_releases

plus ``classify_attribute`` for bucketing projects into S/M/L size classes
by their structural metrics.
"""

from __future__ import annotations

import csv
import json
import re
import time as _time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
import requests

from .errors import (
    EmptySeriesError,
    NetworkError,
    ParseError,
    RateLimitError,
    UnknownRepoError,
)
from .series import FailureSeries

SECONDS_PER_DAY = 86400.0
TIME_EPSILON = 1e-6

DEFECT_KEYWORDS = frozenset({"bug", "error", "fail", "fault", "defect"})
EXCLUSION_KEYWORDS = frozenset({"duplicat"})

DEFAULT_MIN_FAULTS = 20

ATTRIBUTE_METRICS = ("LOC", "NOC", "NOI", "NOFA")
# lower/upper cut of the middle (M) class; boundary values are M
_ATTRIBUTE_CUTS = {
    "LOC": (10_000, 100_000),
    "NOC": (100, 300),
    "NOI": (1_000, 10_000),
    "NOFA": (500, 5_000),
}

_CATEGORY_RE = re.compile(r"^C[1-8]$")


@dataclass(frozen=True)
class IssueRecord:
    id: int
    created_at: datetime
    labels: tuple[str, ...] = ()
    title: str = ""
    state: str = ""


@dataclass
class ParseResult:
    """Parsed records plus notes about records that had to be skipped."""

    records: list[IssueRecord]
    skipped: list[str]


@dataclass(frozen=True)
class ReleaseWindow:
    """Half-open observation window [start, end) named after a release."""

    name: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"release {self.name!r}: start must precede end")


@dataclass
class SegmentationResult:
    series: list[FailureSeries]
    dropped: list[tuple[str, int]]


@dataclass(frozen=True)
class ProjectAttributes:
    project: str
    category: str
    loc: int
    noc: int
    noi: int
    nofa: int

    def metric(self, name: str) -> int:
        return {
            "LOC": self.loc,
            "NOC": self.noc,
            "NOI": self.noi,
            "NOFA": self.nofa,
        }[name.upper()]


def parse_timestamp(value: str) -> datetime:
    """ISO-8601 timestamp to an aware UTC datetime (naive input counts as UTC)."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        return stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


def _normalize_labels(raw) -> tuple[str, ...]:
    labels = []
    for entry in raw or ():
        if isinstance(entry, str):
            labels.append(entry)
        elif isinstance(entry, dict) and isinstance(entry.get("name"), str):
            labels.append(entry["name"])
    return tuple(labels)


def _record_from_dict(obj: dict, position: str, skipped: list[str]) -> IssueRecord | None:
    if not isinstance(obj, dict):
        skipped.append(f"{position}: not an object")
        return None
    if "id" not in obj:
        skipped.append(f"{position}: missing id")
        return None
    if "created_at" not in obj or obj["created_at"] in (None, ""):
        skipped.append(f"{position}: missing created_at")
        return None
    try:
        created = parse_timestamp(str(obj["created_at"]))
    except ValueError:
        skipped.append(f"{position}: unreadable created_at {obj['created_at']!r}")
        return None
    try:
        issue_id = int(obj["id"])
    except (TypeError, ValueError):
        skipped.append(f"{position}: unreadable id {obj['id']!r}")
        return None
    return IssueRecord(
        id=issue_id,
        created_at=created,
        labels=_normalize_labels(obj.get("labels")),
        title=str(obj.get("title") or ""),
        state=str(obj.get("state") or ""),
    )


def parse_issues(document: bytes | str | IO) -> ParseResult:
    """Parse a JSON array or newline-delimited JSON of issue objects.

    Records are sorted by creation time.  Records missing their id or
    creation time are skipped with a note; malformed JSON raises
    ``ParseError`` carrying the byte offset of the failure.
    """
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        text = document.decode("utf-8")
    else:
        text = document

    skipped: list[str] = []
    records: list[IssueRecord] = []

    def byte_offset(char_pos: int) -> int:
        return len(text[:char_pos].encode("utf-8"))

    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", offset=byte_offset(exc.pos)) from exc
        if not isinstance(data, list):
            raise ParseError("top-level JSON value must be an array")
        for index, obj in enumerate(data):
            record = _record_from_dict(obj, f"record {index}", skipped)
            if record is not None:
                records.append(record)
    else:
        char_base = 0
        for line_no, line in enumerate(text.splitlines(keepends=True)):
            content = line.strip()
            if content:
                try:
                    obj = json.loads(content)
                except json.JSONDecodeError as exc:
                    position = char_base + line.find(content) + exc.pos
                    raise ParseError(
                        f"malformed JSON on line {line_no + 1}: {exc.msg}",
                        offset=byte_offset(position),
                    ) from exc
                record = _record_from_dict(obj, f"line {line_no + 1}", skipped)
                if record is not None:
                    records.append(record)
            char_base += len(line)

    seen: set[int] = set()
    unique: list[IssueRecord] = []
    for record in records:
        if record.id in seen:
            skipped.append(f"id {record.id}: duplicate id, keeping first occurrence")
            continue
        seen.add(record.id)
        unique.append(record)
    unique.sort(key=lambda r: (r.created_at, r.id))
    return ParseResult(records=unique, skipped=skipped)


def issue_to_json(record: IssueRecord) -> dict:
    """Plain-JSON form of a record; parse_issues round-trips it exactly."""
    return {
        "id": record.id,
        "created_at": record.created_at.isoformat(),
        "labels": list(record.labels),
        "title": record.title,
        "state": record.state,
    }


# ---------------------------------------------------------------------------
# live fetch
# ---------------------------------------------------------------------------


def fetch_issues(
    repo_slug: str,
    auth_token: str | None = None,
    page_size: int = 100,
    *,
    session=None,
    sleep=_time.sleep,
    base_url: str = "https://api.github.com",
    max_rate_limit_waits: int = 3,
) -> list[IssueRecord]:
    """Fetch all issues of ``owner/name`` from the tracker's REST listing.

    Walks the paginated endpoint, converts entries to ``IssueRecord``
    (pull requests are skipped), and honours rate limiting by sleeping
    until the advertised reset before retrying.  Raises
    ``UnknownRepoError`` on 404, ``RateLimitError`` once the wait budget
    is exhausted, and ``NetworkError`` for transport failures and other
    unexpected statuses.  ``session`` and ``sleep`` are injectable for
    testing.
    """
    if session is None:
        session = requests.Session()
    headers = {"Accept": "application/vnd.github+json"}
    if auth_token:
        headers["Authorization"] = f"Bearer {auth_token}"

    records: list[IssueRecord] = []
    skipped: list[str] = []
    page = 1
    waits = 0
    while True:
        url = f"{base_url}/repos/{repo_slug}/issues"
        params = {"state": "all", "per_page": page_size, "page": page}
        try:
            response = session.get(url, params=params, headers=headers, timeout=30)
        except requests.RequestException as exc:
            raise NetworkError(f"fetching {repo_slug} page {page}: {exc}") from exc

        status = response.status_code
        if status == 404:
            raise UnknownRepoError(f"repository {repo_slug!r} not found")
        if status in (403, 429):
            delay = _rate_limit_delay(response.headers)
            if delay is None:
                raise NetworkError(f"HTTP {status} fetching {repo_slug} page {page}")
            if waits >= max_rate_limit_waits:
                raise RateLimitError(
                    f"rate limit on {repo_slug} persisted after "
                    f"{max_rate_limit_waits} waits; retry after {delay:.0f}s"
                )
            waits += 1
            sleep(delay)
            continue
        if status != 200:
            raise NetworkError(f"HTTP {status} fetching {repo_slug} page {page}")

        try:
            items = response.json()
        except ValueError as exc:
            raise NetworkError(f"unreadable JSON from {repo_slug} page {page}") from exc
        if not isinstance(items, list):
            raise NetworkError(f"unexpected payload shape from {repo_slug} page {page}")

        for index, item in enumerate(items):
            if isinstance(item, dict) and "pull_request" in item:
                continue
            record = _record_from_dict(item, f"page {page} item {index}", skipped)
            if record is not None:
                records.append(record)

        if len(items) < page_size:
            break
        page += 1

    records.sort(key=lambda r: (r.created_at, r.id))
    return records


def _rate_limit_delay(headers) -> float | None:
    retry_after = headers.get("Retry-After")
    if retry_after is not None:
        try:
            return max(0.0, float(retry_after))
        except ValueError:
            return None
    if headers.get("X-RateLimit-Remaining") == "0":
        reset = headers.get("X-RateLimit-Reset")
        try:
            return max(0.0, float(reset) - _time.time())
        except (TypeError, ValueError):
            return None
    return None


# ---------------------------------------------------------------------------
# filtering and series construction
# ---------------------------------------------------------------------------


def filter_defects(
    issues: Iterable[IssueRecord],
    keywords: frozenset[str] | set[str] = DEFECT_KEYWORDS,
    exclusions: frozenset[str] | set[str] = EXCLUSION_KEYWORDS,
    include_title: bool = False,
) -> list[IssueRecord]:
    """Keep issues labeled as defects and drop duplicates.

    An issue qualifies when any label contains any keyword
    (case-insensitive substring), unless a label also contains an
    exclusion term.  ``include_title`` extends the keyword matching (not
    the exclusions) to the issue title.  The filter is idempotent.
    """
    kws = {k.lower() for k in keywords}
    excl = {e.lower() for e in exclusions}
    kept = []
    for issue in issues:
        lowered = [label.lower() for label in issue.labels]
        if any(e in label for e in excl for label in lowered):
            continue
        matched = any(k in label for k in kws for label in lowered)
        if not matched and include_title:
            title = issue.title.lower()
            matched = any(k in title for k in kws)
        if matched:
            kept.append(issue)
    return kept


def build_series(
    issues: Sequence[IssueRecord],
    window: ReleaseWindow | None = None,
    label: str | None = None,
) -> FailureSeries:
    """Failure series of issue creation times, in fractional days.

    With a window only issues in [start, end) count and time zero is the
    window start; otherwise time zero is the first issue and the horizon
    is the last one.  Times of exactly zero are shifted to 1e-6 so the
    series stays strictly positive.
    """
    ordered = sorted(issues, key=lambda r: (r.created_at, r.id))
    if window is not None:
        ordered = [r for r in ordered if window.start <= r.created_at < window.end]
    if not ordered:
        scope = f"window {window.name!r}" if window else "input"
        raise EmptySeriesError(f"no issues in {scope}")

    start = window.start if window is not None else ordered[0].created_at
    times = np.array(
        [(r.created_at - start).total_seconds() / SECONDS_PER_DAY for r in ordered],
        dtype=float,
    )
    times[times == 0.0] = TIME_EPSILON
    if window is not None:
        horizon = (window.end - window.start).total_seconds() / SECONDS_PER_DAY
    else:
        horizon = float(times[-1])
    name = label if label is not None else (window.name if window else "all")
    return FailureSeries(times=times, horizon=horizon, label=name)


def segment_releases(
    issues: Sequence[IssueRecord],
    windows: Sequence[ReleaseWindow],
    min_faults: int = DEFAULT_MIN_FAULTS,
) -> SegmentationResult:
    """Per-release failure series, dropping releases with too few faults.

    Windows must not overlap.  Releases whose windows hold fewer than
    ``min_faults`` issues are not turned into series; they are reported in
    ``dropped`` as (name, count) instead.
    """
    ordered = sorted(windows, key=lambda w: w.start)
    for before, after in zip(ordered, ordered[1:]):
        if after.start < before.end:
            raise ValueError(
                f"release windows {before.name!r} and {after.name!r} overlap"
            )
    series = []
    dropped = []
    for window in ordered:
        count = sum(1 for r in issues if window.start <= r.created_at < window.end)
        if count < min_faults or count == 0:
            dropped.append((window.name, count))
            continue
        series.append(build_series(issues, window))
    return SegmentationResult(series=series, dropped=dropped)


def classify_attribute(metric: str, value: int) -> str:
    """S/M/L size class of a project attribute value.

    Values below the lower cut are S, values above the upper cut are L,
    and everything in between, boundaries included, is M.
    """
    name = metric.upper()
    if name not in _ATTRIBUTE_CUTS:
        raise ValueError(f"unknown attribute {metric!r}; expected one of {ATTRIBUTE_METRICS}")
    if value < 0:
        raise ValueError(f"attribute {name} must be nonnegative, got {value}")
    low, high = _ATTRIBUTE_CUTS[name]
    if value < low:
        return "S"
    if value <= high:
        return "M"
    return "L"


# ---------------------------------------------------------------------------
# CSV side inputs
# ---------------------------------------------------------------------------


def load_releases_csv(path: str | Path) -> list[ReleaseWindow]:
    """Read release windows from a CSV with header name,start,end."""
    windows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        _require_columns(reader, {"name", "start", "end"}, path)
        for row in reader:
            try:
                windows.append(
                    ReleaseWindow(
                        name=row["name"],
                        start=parse_timestamp(row["start"]),
                        end=parse_timestamp(row["end"]),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}: {exc}") from exc
    return windows


def load_attributes_csv(path: str | Path) -> dict[str, ProjectAttributes]:
    """Read project attributes from a CSV with header
    project,category,loc,noc,noi,nofa."""
    table: dict[str, ProjectAttributes] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        _require_columns(reader, {"project", "category", "loc", "noc", "noi", "nofa"}, path)
        for row in reader:
            category = row["category"].strip()
            if not _CATEGORY_RE.match(category):
                raise ValueError(
                    f"{path}: category must be C1..C8, got {category!r} "
                    f"for project {row['project']!r}"
                )
            try:
                attrs = ProjectAttributes(
                    project=row["project"],
                    category=category,
                    loc=int(row["loc"]),
                    noc=int(row["noc"]),
                    noi=int(row["noi"]),
                    nofa=int(row["nofa"]),
                )
            except ValueError as exc:
                raise ValueError(f"{path}: bad attribute row for {row['project']!r}: {exc}") from exc
            table[attrs.project] = attrs
    return table


def _require_columns(reader: csv.DictReader, needed: set[str], path) -> None:
    have = set(reader.fieldnames or ())
    missing = needed - have
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")

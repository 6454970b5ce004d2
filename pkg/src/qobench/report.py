"""Aggregation of run reports into comparison tables and plot-ready files.

Totals are sums over the selected records; timed-out queries contribute
their full timeout budget (dropping them would reward catastrophic plans).
Emission is deterministic: stable column order, fixed float precision, so
re-emitting identical data yields identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import QobenchError
from .measurement import LagSummary
from .runner import RunReport
from .stats import bootstrap_ci, speedup_factor

SUBSETS = ("train", "test", "all")


class ReportError(QobenchError):
    pass


class EmptySubset(ReportError):
    pass


class MissingBaseline(ReportError):
    pass


@dataclass(frozen=True)
class AggregateRow:
    adapter: str
    split: str
    subset: str
    query_count: int
    total_inference_ms: float
    total_planning_ms: float
    total_execution_ms: float
    total_end_to_end_ms: float
    timeout_count: int
    error_count: int
    ci_low: float
    ci_high: float


def aggregate(
    report: RunReport,
    subset: str = "test",
    ci_level: float = 0.95,
    ci_seed: int = 7,
    ci_resamples: int = 2_000,
) -> AggregateRow:
    """Field-wise sums over the subset, with a bootstrap interval on the
    end-to-end total."""
    if subset not in SUBSETS:
        raise ValueError(f"subset must be one of {SUBSETS}")
    records = report.subset_records(subset)
    if not records:
        raise EmptySubset(f"run {report.adapter!r} has no {subset!r} records")
    end_to_end = [r.end_to_end_ms for r in records]
    if len(end_to_end) >= 2:
        ci_low, ci_high = bootstrap_ci(
            end_to_end, statistic="sum", level=ci_level, seed=ci_seed, resamples=ci_resamples
        )
    else:
        ci_low = ci_high = end_to_end[0]
    return AggregateRow(
        adapter=report.adapter,
        split=report.split_label,
        subset=subset,
        query_count=len(records),
        total_inference_ms=sum(r.inference_ms for r in records),
        total_planning_ms=sum(r.planning_ms for r in records),
        total_execution_ms=sum(r.execution_ms for r in records),
        total_end_to_end_ms=sum(end_to_end),
        timeout_count=sum(1 for r in records if r.timed_out),
        error_count=sum(1 for r in records if r.error),
        ci_low=ci_low,
        ci_high=ci_high,
    )


@dataclass(frozen=True)
class ComparisonRow:
    adapter: str
    rank: int
    total_end_to_end_ms: float
    factor: float
    direction: str
    ci_overlaps_baseline: bool
    timeout_count: int


@dataclass(frozen=True)
class ComparisonTable:
    baseline: str
    rows: tuple[ComparisonRow, ...]


def compare(rows: Sequence[AggregateRow], baseline: str) -> ComparisonTable:
    """Rank adapters by end-to-end total and relate each to the baseline."""
    by_adapter = {row.adapter: row for row in rows}
    if baseline not in by_adapter:
        raise MissingBaseline(f"baseline {baseline!r} not among {sorted(by_adapter)}")
    base = by_adapter[baseline]
    ordered = sorted(rows, key=lambda r: (r.total_end_to_end_ms, r.adapter))
    out = []
    for rank, row in enumerate(ordered, start=1):
        ratio = speedup_factor(base.total_end_to_end_ms, row.total_end_to_end_ms)
        overlap = row.ci_low <= base.ci_high and base.ci_low <= row.ci_high
        out.append(
            ComparisonRow(
                adapter=row.adapter,
                rank=rank,
                total_end_to_end_ms=row.total_end_to_end_ms,
                factor=ratio.factor,
                direction=ratio.direction,
                ci_overlaps_baseline=overlap,
                timeout_count=row.timeout_count,
            )
        )
    return ComparisonTable(baseline=baseline, rows=tuple(out))


# --- emission -----------------------------------------------------------------

_AGGREGATE_COLUMNS = (
    "adapter",
    "split",
    "subset",
    "query_count",
    "total_inference_ms",
    "total_planning_ms",
    "total_execution_ms",
    "total_end_to_end_ms",
    "timeout_count",
    "error_count",
    "ci_low",
    "ci_high",
)

_COMPARISON_COLUMNS = (
    "adapter",
    "rank",
    "total_end_to_end_ms",
    "factor",
    "direction",
    "ci_overlaps_baseline",
    "timeout_count",
)

_LAG_COLUMNS = ("lag", "query_id", "normalized_diff")

_MS_PRECISION = 3


def _fmt(value: object, column: str) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if column == "factor":
            return f"{value:.1f}"
        return f"{value:.{_MS_PRECISION}f}"
    return str(value)


def _rows_for(table: object) -> tuple[tuple[str, ...], list[object]]:
    if isinstance(table, ComparisonTable):
        return _COMPARISON_COLUMNS, list(table.rows)
    rows = list(table)  # type: ignore[arg-type]
    if rows and isinstance(rows[0], ComparisonRow):
        return _COMPARISON_COLUMNS, rows
    if rows and isinstance(rows[0], LagSummary):
        flat = [
            {"lag": s.lag, "query_id": qid.text, "normalized_diff": diff}
            for s in rows
            for qid, diff in s.diffs
        ]
        return _LAG_COLUMNS, flat
    return _AGGREGATE_COLUMNS, rows


def _cell(row: object, column: str) -> object:
    if isinstance(row, dict):
        return row[column]
    return getattr(row, column)


def emit(table: object, fmt: str, path: str | Path) -> Path:
    """Write aggregate rows, a comparison table, or lag summaries.

    ``csv`` writes one row per entry; ``structured-text`` writes the same
    cells as indented JSON. Both are byte-stable for identical input.
    """
    columns, rows = _rows_for(table)
    formatted = [{c: _fmt(_cell(r, c), c) for c in columns} for r in rows]
    out = Path(path)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(formatted)
        out.write_text(buffer.getvalue(), encoding="utf-8")
    elif fmt == "structured-text":
        out.write_text(json.dumps(formatted, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"format must be csv or structured-text, got {fmt!r}")
    return out

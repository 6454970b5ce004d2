"""Hot-cache query timing with decomposed records.

A measurement runs one query k times back-to-back on one session (nothing
interleaves, so later repetitions see warm buffers) under an instrumented
explain, and reads planning/execution milliseconds from the engine's own
structured report — client and network latency never enter the numbers.

The default policy is k=3 picking the third repetition: the first run pays
the cold-cache penalty, the second still moves, the third is stable.
``successive_diffs`` quantifies exactly that convergence over longer run
series.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .adapters import PlanDirective
from .dbms import HintRejected, QueryFailed, SessionHandle, StatementTimeout
from .errors import QobenchError
from .workload import QueryId

EXPLAIN_TEMPLATE = "EXPLAIN (ANALYZE, FORMAT JSON) {sql}"
PLANNING_KEY = "Planning Time"
EXECUTION_KEY = "Execution Time"

PICKS = ("kth", "mean", "geomean")


class MeasurementError(QobenchError):
    pass


class InsufficientRuns(MeasurementError):
    """A run series is shorter than the requested maximum lag + 1."""


@dataclass(frozen=True)
class TimingPolicy:
    k: int = 3
    pick: str = "kth"
    timeout_ms: float = 300_000.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.pick not in PICKS:
            raise ValueError(f"pick must be one of {PICKS}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")


@dataclass(frozen=True)
class TimingRecord:
    """One measured query: inference + planning + execution = end to end."""

    query_id: QueryId
    adapter: str
    inference_ms: float
    planning_ms: float
    execution_ms: float
    end_to_end_ms: float
    timed_out: bool = False
    repetitions: tuple[tuple[float, float], ...] = ()
    error: str | None = None
    explains: tuple = field(default=(), compare=False, repr=False)


def parse_explain_rows(rows: list[tuple]) -> dict:
    """Top-level timing object out of a structured explain result set."""
    if not rows or not rows[0]:
        raise QueryFailed("explain returned no rows")
    payload = rows[0][0]
    doc = json.loads(payload) if isinstance(payload, str) else payload
    if isinstance(doc, list):
        doc = doc[0]
    if PLANNING_KEY not in doc or EXECUTION_KEY not in doc:
        raise QueryFailed(f"explain output lacks {PLANNING_KEY!r}/{EXECUTION_KEY!r}")
    return doc


def _pick(values: Sequence[float], pick: str, k: int) -> float:
    if pick == "kth":
        return values[k - 1]
    if pick == "mean":
        return statistics.fmean(values)
    logs = [math.log(v) for v in values if v > 0]
    if len(logs) < len(values):
        return 0.0
    return math.exp(statistics.fmean(logs))


def measure_query(
    session: SessionHandle,
    sql: str,
    directive: PlanDirective,
    policy: TimingPolicy = TimingPolicy(),
    *,
    query_id: QueryId,
    adapter: str = "native",
    inference_ms: float = 0.0,
) -> TimingRecord:
    """Execute (hint + query) k times on the session and pick per policy.

    The hint comment is prepended to the SQL so the hint extension sees it
    first. Directive settings and the statement timeout are applied for the
    repetitions only and restored afterwards. On timeout the record is
    flagged, execution is charged the full budget, and no further repetitions
    run.
    """
    text = f"{directive.hint_text}\n{sql}" if directive.hint_text else sql
    statement = EXPLAIN_TEMPLATE.format(sql=text)
    temporary = list(directive.session_settings) + [
        ("statement_timeout", str(int(policy.timeout_ms)))
    ]
    repetitions: list[tuple[float, float]] = []
    explains: list[dict] = []
    timed_out = False
    with session.temporary_settings(temporary):
        for _ in range(policy.k):
            try:
                doc = parse_explain_rows(session.execute(statement))
            except StatementTimeout:
                timed_out = True
                break
            except HintRejected:
                raise
            repetitions.append((float(doc[PLANNING_KEY]), float(doc[EXECUTION_KEY])))
            explains.append(doc)

    if timed_out:
        planning = repetitions[-1][0] if repetitions else 0.0
        execution = policy.timeout_ms
    else:
        planning = _pick([p for p, _ in repetitions], policy.pick, policy.k)
        execution = _pick([e for _, e in repetitions], policy.pick, policy.k)
    return TimingRecord(
        query_id=query_id,
        adapter=adapter,
        inference_ms=inference_ms,
        planning_ms=planning,
        execution_ms=execution,
        end_to_end_ms=inference_ms + planning + execution,
        timed_out=timed_out,
        repetitions=tuple(repetitions),
        explains=tuple(explains),
    )


@dataclass(frozen=True)
class LagSummary:
    """Distribution of normalized run-to-run differences at one lag."""

    lag: int
    diffs: tuple[tuple[QueryId, float], ...]
    mean: float
    median: float
    std: float
    minimum: float
    maximum: float


def successive_diffs(
    per_query_runs: Mapping[QueryId, Sequence[float]], max_lag: int
) -> list[LagSummary]:
    """Per-lag convergence of repeated executions.

    For lag k, each query contributes (t[k] - t[k-1]) / t[0] (zero-indexed):
    the change between the k-th and (k+1)-th execution relative to the first.
    Negative means the later run was faster.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    for qid, runs in per_query_runs.items():
        if len(runs) < max_lag + 1:
            raise InsufficientRuns(
                f"{qid.text}: {len(runs)} runs < max_lag {max_lag} + 1"
            )
    summaries = []
    for lag in range(1, max_lag + 1):
        diffs = [
            (qid, (runs[lag] - runs[lag - 1]) / runs[0])
            for qid, runs in per_query_runs.items()
        ]
        values = [d for _, d in diffs]
        summaries.append(
            LagSummary(
                lag=lag,
                diffs=tuple(diffs),
                mean=statistics.fmean(values),
                median=statistics.median(values),
                std=statistics.pstdev(values) if len(values) > 1 else 0.0,
                minimum=min(values),
                maximum=max(values),
            )
        )
    return summaries

"""Experiment orchestration: benchmark runs, ablations, database mutation.

A benchmark run walks the workload in its deterministic order, once per
adapter: plan, validate the directive, measure with k repetitions. Every
query yields exactly one record — failures are embedded in the record, they
never abort a run. Train-set queries are measured too (tagged), so reports
can separate train from test without a second pass.

Ablations measure each query in two arms that differ in exactly the toggled
settings (the diff is read back from the live session and recorded), with
enough repetitions per arm to support a rank test per query.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .adapters import (
    AdapterDescriptor,
    AdapterError,
    DEFAULT_ADAPTER_TIMEOUT_MS,
    PlanDirective,
    make_adapter,
    validate_directive,
)
from .dbms import (
    ConfigProfile,
    Driver,
    HintRejected,
    QueryFailed,
    SessionHandle,
    config_snapshot,
    connect,
    set_geqo,
)
from .errors import QobenchError
from .measurement import TimingPolicy, TimingRecord, measure_query
from .splitter import SplitSpec, validate_split
from .stats import mann_whitney_u, speedup_factor
from .workload import QueryId, Workload

SIGNIFICANCE_LEVEL = 0.05
DEFAULT_DELTA_THRESHOLD_MS = 250.0
DEFAULT_REPEATS_PER_ARM = 10

TOGGLES: dict[str, tuple[tuple[str, str], ...]] = {
    "scans_off": (("enable_bitmapscan", "off"), ("enable_tidscan", "off")),
    "geqo_off": (("geqo", "off"),),
}


class RunnerError(QobenchError):
    pass


class BadFraction(RunnerError):
    pass


@dataclass(frozen=True)
class RunRecord:
    subset: str  # train | test
    timing: TimingRecord


@dataclass(frozen=True)
class RunReport:
    workload_name: str
    split_label: str
    adapter: str
    profile_name: str
    profile_snapshot: dict[str, str]
    policy: TimingPolicy
    geqo_on: bool
    records: tuple[RunRecord, ...]
    started: str
    finished: str
    harness_version: str = __version__

    def subset_records(self, subset: str) -> tuple[TimingRecord, ...]:
        if subset == "all":
            return tuple(r.timing for r in self.records)
        return tuple(r.timing for r in self.records if r.subset == subset)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _error_record(qid: QueryId, adapter: str, inference_ms: float, error: str) -> TimingRecord:
    return TimingRecord(
        query_id=qid,
        adapter=adapter,
        inference_ms=inference_ms,
        planning_ms=0.0,
        execution_ms=0.0,
        end_to_end_ms=inference_ms,
        timed_out=False,
        repetitions=(),
        error=error,
    )


def run_benchmark(
    workload: Workload,
    split: SplitSpec,
    adapters: Sequence[AdapterDescriptor],
    profile: ConfigProfile,
    policy: TimingPolicy = TimingPolicy(),
    *,
    dsn: str = "fake:framework",
    driver_factory: Callable[[], Driver] | None = None,
    adapter_timeout_ms: float = DEFAULT_ADAPTER_TIMEOUT_MS,
    allow_mismatch: bool = False,
) -> list[RunReport]:
    """Measure the whole workload once per adapter under a shared split.

    One fresh session per adapter; queries run sequentially in workload
    order, repetitions contiguous, so the hot-cache contract holds.
    """
    problems = validate_split(workload, split)
    if problems:
        raise RunnerError(f"split does not match workload: {problems}")
    reports = []
    for descriptor in adapters:
        driver = driver_factory() if driver_factory is not None else None
        session = connect(dsn, profile, driver=driver, allow_mismatch=allow_mismatch)
        started = _now()
        try:
            geqo_on = set_geqo(session, descriptor.kind == "native", profile)
            snapshot = config_snapshot(session, profile)
            client = make_adapter(descriptor, timeout_ms=adapter_timeout_ms)
            try:
                records = [
                    RunRecord(
                        subset=split.subset_of(query.id),
                        timing=_run_one(session, client, descriptor, query, policy),
                    )
                    for query in workload
                ]
            finally:
                client.close()
        finally:
            session.close()
        reports.append(
            RunReport(
                workload_name=workload.name,
                split_label=split.label,
                adapter=descriptor.name,
                profile_name=profile.name,
                profile_snapshot=snapshot,
                policy=policy,
                geqo_on=geqo_on,
                records=tuple(records),
                started=started,
                finished=_now(),
            )
        )
    return reports


def _run_one(session, client, descriptor, query, policy) -> TimingRecord:
    try:
        directive, inference_ms = client.plan(query)
    except AdapterError as exc:
        return _error_record(query.id, descriptor.name, 0.0, f"{type(exc).__name__}: {exc}")
    violations = validate_directive(directive)
    if violations:
        return _error_record(
            query.id, descriptor.name, inference_ms, f"InvalidDirective: {'; '.join(violations)}"
        )
    try:
        return measure_query(
            session,
            query.sql_text,
            directive,
            policy,
            query_id=query.id,
            adapter=descriptor.name,
            inference_ms=inference_ms,
        )
    except (HintRejected, QueryFailed) as exc:
        return _error_record(
            query.id, descriptor.name, inference_ms, f"{type(exc).__name__}: {exc}"
        )


@dataclass(frozen=True)
class AblationEntry:
    query_id: QueryId
    baseline: TimingRecord
    toggled: TimingRecord
    delta_ms: float  # mean toggled execution minus mean baseline execution
    exceeds_threshold: bool
    p_value: float
    significant: bool
    factor: float
    direction: str


@dataclass(frozen=True)
class AblationReport:
    toggle: str
    toggled_settings: tuple[tuple[str, str], ...]
    settings_diff: tuple[tuple[str, str, str], ...]  # (name, baseline, toggled)
    delta_threshold_ms: float
    repeats_per_arm: int
    entries: tuple[AblationEntry, ...]
    profile_name: str
    policy: TimingPolicy

    def flagged(self) -> tuple[AblationEntry, ...]:
        return tuple(e for e in self.entries if e.exceeds_threshold)

    def significant_entries(self) -> tuple[AblationEntry, ...]:
        return tuple(e for e in self.entries if e.exceeds_threshold and e.significant)


def run_ablation(
    workload: Workload,
    toggle: str,
    profile: ConfigProfile,
    policy: TimingPolicy = TimingPolicy(),
    delta_threshold_ms: float = DEFAULT_DELTA_THRESHOLD_MS,
    repeats_per_arm: int = DEFAULT_REPEATS_PER_ARM,
    *,
    dsn: str = "fake:framework",
    driver_factory: Callable[[], Driver] | None = None,
    allow_mismatch: bool = False,
) -> AblationReport:
    """Measure every query with and without the toggled settings.

    A query is flagged when the mean execution difference exceeds the
    threshold, and significant when a two-sided rank test across the per-arm
    samples rejects at the 5% level.
    """
    if toggle not in TOGGLES:
        raise ValueError(f"unknown toggle {toggle!r}; expected one of {tuple(TOGGLES)}")
    toggled_settings = TOGGLES[toggle]
    arm_policy = replace(policy, k=repeats_per_arm, pick="mean")
    driver = driver_factory() if driver_factory is not None else None
    session = connect(dsn, profile, driver=driver, allow_mismatch=allow_mismatch)
    entries = []
    try:
        watched = sorted({name for name, _ in toggled_settings})
        baseline_live = {name: session.show(name) for name in watched}
        with session.temporary_settings(list(toggled_settings)):
            toggled_live = {name: session.show(name) for name in watched}
        settings_diff = tuple(
            (name, baseline_live[name], toggled_live[name])
            for name in watched
            if baseline_live[name] != toggled_live[name]
        )
        for query in workload:
            baseline = measure_query(
                session,
                query.sql_text,
                PlanDirective(),
                arm_policy,
                query_id=query.id,
                adapter="baseline",
            )
            toggled = measure_query(
                session,
                query.sql_text,
                PlanDirective(session_settings=toggled_settings),
                arm_policy,
                query_id=query.id,
                adapter=toggle,
            )
            entries.append(_ablation_entry(query.id, baseline, toggled, delta_threshold_ms))
    finally:
        session.close()
    return AblationReport(
        toggle=toggle,
        toggled_settings=toggled_settings,
        settings_diff=settings_diff,
        delta_threshold_ms=delta_threshold_ms,
        repeats_per_arm=repeats_per_arm,
        entries=tuple(entries),
        profile_name=profile.name,
        policy=arm_policy,
    )


def _ablation_entry(
    qid: QueryId, baseline: TimingRecord, toggled: TimingRecord, threshold_ms: float
) -> AblationEntry:
    base_samples = [e for _, e in baseline.repetitions]
    tog_samples = [e for _, e in toggled.repetitions]
    base_mean = sum(base_samples) / len(base_samples) if base_samples else baseline.execution_ms
    tog_mean = sum(tog_samples) / len(tog_samples) if tog_samples else toggled.execution_ms
    delta = tog_mean - base_mean
    exceeds = abs(delta) > threshold_ms
    if base_samples and tog_samples:
        p_value = mann_whitney_u(base_samples, tog_samples, alternative="two_sided").p_value
    else:
        p_value = 1.0
    ratio = speedup_factor(base_mean, tog_mean) if base_mean > 0 and tog_mean > 0 else None
    return AblationEntry(
        query_id=qid,
        baseline=baseline,
        toggled=toggled,
        delta_ms=delta,
        exceeds_threshold=exceeds,
        p_value=p_value,
        significant=p_value < SIGNIFICANCE_LEVEL,
        factor=ratio.factor if ratio else 1.0,
        direction=ratio.direction if ratio else "slowdown",
    )


def gen_covariate_script(
    table: str,
    key_column: str,
    keep_fraction: float,
    seed: float,
    dependents: Sequence[tuple[str, str]] = (),
) -> str:
    """SQL script that removes a seeded random share of a table's rows.

    The doomed keys are fixed in a temporary table first, so explicit
    dependent deletes (for schemas without cascading foreign keys) and the
    parent delete agree on the victim set. Statistics are refreshed at the
    end. The text is deterministic for fixed inputs.
    """
    if not 0.0 < keep_fraction < 1.0:
        raise BadFraction(f"keep_fraction must be in (0, 1), got {keep_fraction}")
    if not -1.0 <= seed <= 1.0:
        raise ValueError(f"seed must be in [-1, 1], got {seed}")
    doomed = f"doomed_{table}"
    lines = [
        f"-- Keep ~{keep_fraction:g} of {table} (uniform per-row sampling, seed {seed:g});",
        f"-- dependents are removed explicitly so referential integrity holds",
        f"-- even without ON DELETE CASCADE.",
        "BEGIN;",
        f"SELECT setseed({seed:g});",
        f"CREATE TEMPORARY TABLE {doomed} ON COMMIT DROP AS",
        f"    SELECT {key_column} FROM {table} WHERE random() >= {keep_fraction:g};",
    ]
    for dep_table, fk_column in dependents:
        lines.append(
            f"DELETE FROM {dep_table} WHERE {fk_column} IN (SELECT {key_column} FROM {doomed});"
        )
    lines += [
        f"DELETE FROM {table} WHERE {key_column} IN (SELECT {key_column} FROM {doomed});",
        "COMMIT;",
        "ANALYZE;",
    ]
    return "\n".join(lines) + "\n"


# --- report persistence ------------------------------------------------------


def save_run_report(report: RunReport, path: str | Path) -> None:
    doc = {
        "workload": report.workload_name,
        "split": report.split_label,
        "adapter": report.adapter,
        "profile": report.profile_name,
        "profile_snapshot": report.profile_snapshot,
        "policy": {
            "k": report.policy.k,
            "pick": report.policy.pick,
            "timeout_ms": report.policy.timeout_ms,
        },
        "geqo_on": report.geqo_on,
        "started": report.started,
        "finished": report.finished,
        "harness_version": report.harness_version,
        "records": [
            {
                "query_id": r.timing.query_id.text,
                "subset": r.subset,
                "inference_ms": r.timing.inference_ms,
                "planning_ms": r.timing.planning_ms,
                "execution_ms": r.timing.execution_ms,
                "end_to_end_ms": r.timing.end_to_end_ms,
                "timed_out": r.timing.timed_out,
                "repetitions": [list(rep) for rep in r.timing.repetitions],
                "error": r.timing.error,
                "explains": list(r.timing.explains),
            }
            for r in report.records
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_run_report(path: str | Path) -> RunReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    records = tuple(
        RunRecord(
            subset=r["subset"],
            timing=TimingRecord(
                query_id=QueryId.from_text(r["query_id"]),
                adapter=doc["adapter"],
                inference_ms=r["inference_ms"],
                planning_ms=r["planning_ms"],
                execution_ms=r["execution_ms"],
                end_to_end_ms=r["end_to_end_ms"],
                timed_out=r["timed_out"],
                repetitions=tuple(tuple(rep) for rep in r["repetitions"]),
                error=r.get("error"),
                explains=tuple(r.get("explains", ())),
            ),
        )
        for r in doc["records"]
    )
    return RunReport(
        workload_name=doc["workload"],
        split_label=doc["split"],
        adapter=doc["adapter"],
        profile_name=doc["profile"],
        profile_snapshot=doc["profile_snapshot"],
        policy=TimingPolicy(
            k=doc["policy"]["k"], pick=doc["policy"]["pick"], timeout_ms=doc["policy"]["timeout_ms"]
        ),
        geqo_on=doc["geqo_on"],
        records=records,
        started=doc["started"],
        finished=doc["finished"],
        harness_version=doc.get("harness_version", __version__),
    )

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qobench.adapters import AdapterDescriptor
from qobench.dbms import default_profile
from qobench.fakedb import FRAMEWORK_SETTINGS, FakeDbms
from qobench.measurement import TimingPolicy, TimingRecord, successive_diffs
from qobench.report import (
    AggregateRow,
    EmptySubset,
    MissingBaseline,
    aggregate,
    compare,
    emit,
)
from qobench.runner import RunRecord, RunReport, run_benchmark
from qobench.splitter import SplitMethod, sample_split
from qobench.workload import QueryId

NATIVE = AdapterDescriptor(name="native", kind="native")


def record(family: str, variant: str, subset: str, *, inference=0.0, planning=1.0,
           execution=10.0, timed_out=False, error=None) -> RunRecord:
    return RunRecord(
        subset=subset,
        timing=TimingRecord(
            query_id=QueryId(family, variant),
            adapter="native",
            inference_ms=inference,
            planning_ms=planning,
            execution_ms=execution,
            end_to_end_ms=inference + planning + execution,
            timed_out=timed_out,
            repetitions=((planning, execution),),
            error=error,
        ),
    )


def make_report(records, adapter="native") -> RunReport:
    from dataclasses import replace

    stamped = tuple(
        RunRecord(subset=r.subset, timing=replace(r.timing, adapter=adapter)) for r in records
    )
    return RunReport(
        workload_name="t",
        split_label="t/random/1",
        adapter=adapter,
        profile_name="framework-default",
        profile_snapshot={"work_mem": "4GB"},
        policy=TimingPolicy(),
        geqo_on=True,
        records=stamped,
        started="2026-01-01T00:00:00+00:00",
        finished="2026-01-01T00:05:00+00:00",
    )


class TestAggregate:
    def test_totals_are_sums(self):
        report = make_report(
            [
                record("1", "a", "test", execution=10.0),
                record("1", "b", "test", execution=20.0),
                record("2", "a", "test", execution=30.0),
            ]
        )
        row = aggregate(report, subset="test")
        assert row.total_end_to_end_ms == pytest.approx(63.0)  # 3x planning 1 + executions
        assert row.total_execution_ms == pytest.approx(60.0)
        assert row.query_count == 3

    def test_timed_out_contributes_budget(self):
        report = make_report(
            [record("1", "a", "test", execution=300_000.0, timed_out=True)]
        )
        row = aggregate(report, subset="test")
        assert row.total_execution_ms == 300_000.0
        assert row.timeout_count == 1

    def test_empty_subset(self):
        report = make_report([record("1", "a", "train")])
        with pytest.raises(EmptySubset):
            aggregate(report, subset="test")

    def test_all_equals_train_plus_test(self):
        report = make_report(
            [
                record("1", "a", "train", execution=11.0),
                record("1", "b", "test", execution=23.0),
                record("2", "a", "train", inference=2.5, execution=41.0),
            ]
        )
        train = aggregate(report, subset="train")
        test = aggregate(report, subset="test")
        both = aggregate(report, subset="all")
        for field in (
            "total_inference_ms",
            "total_planning_ms",
            "total_execution_ms",
            "total_end_to_end_ms",
            "timeout_count",
            "error_count",
            "query_count",
        ):
            assert getattr(both, field) == pytest.approx(
                getattr(train, field) + getattr(test, field)
            )

    def test_loo_on_job_counts(self, job_like_workload):
        split = sample_split(job_like_workload, SplitMethod("leave_one_out"), 7)
        (run_report,) = run_benchmark(
            job_like_workload,
            split,
            [NATIVE],
            default_profile(),
            driver_factory=lambda: FakeDbms(server_settings=FRAMEWORK_SETTINGS),
        )
        row = aggregate(run_report, subset="test")
        assert row.query_count == 33
        assert aggregate(run_report, subset="train").query_count == 80

    def test_ci_bounds_total(self):
        report = make_report(
            [record("1", v, "test", execution=10.0 * i) for i, v in enumerate("abcdef", 1)]
        )
        row = aggregate(report, subset="test")
        assert row.ci_low <= row.total_end_to_end_ms <= row.ci_high


def agg_row(adapter: str, total: float, ci_spread: float = 1.0, timeouts: int = 0) -> AggregateRow:
    return AggregateRow(
        adapter=adapter,
        split="t/random/1",
        subset="test",
        query_count=10,
        total_inference_ms=0.0,
        total_planning_ms=total * 0.05,
        total_execution_ms=total * 0.95,
        total_end_to_end_ms=total,
        timeout_count=timeouts,
        error_count=0,
        ci_low=total - ci_spread,
        ci_high=total + ci_spread,
    )


class TestCompare:
    def test_quarter_slower(self):
        table = compare([agg_row("native", 30_000.0), agg_row("lqo", 37_500.0)], "native")
        lqo = next(r for r in table.rows if r.adapter == "lqo")
        assert lqo.factor == pytest.approx(1.25)
        assert lqo.direction == "slowdown"
        assert lqo.rank == 2

    def test_identical_totals_rank_by_name(self):
        table = compare([agg_row("bbb", 100.0), agg_row("aaa", 100.0)], "bbb")
        assert [r.adapter for r in table.rows] == ["aaa", "bbb"]
        assert all(r.factor == 1.0 for r in table.rows)

    def test_missing_baseline(self):
        with pytest.raises(MissingBaseline):
            compare([agg_row("a", 1.0)], "nope")

    def test_ci_overlap_flag(self):
        table = compare(
            [agg_row("native", 100.0, ci_spread=5.0), agg_row("near", 104.0, ci_spread=5.0),
             agg_row("far", 200.0, ci_spread=5.0)],
            "native",
        )
        by_name = {r.adapter: r for r in table.rows}
        assert by_name["near"].ci_overlaps_baseline is True
        assert by_name["far"].ci_overlaps_baseline is False

    @given(scale=st.floats(min_value=0.001, max_value=1000.0))
    def test_scale_consistency(self, scale):
        rows = [agg_row("native", 30_000.0), agg_row("lqo", 45_000.0)]
        scaled = [
            AggregateRow(**{**r.__dict__,
                            "total_end_to_end_ms": r.total_end_to_end_ms * scale,
                            "ci_low": r.ci_low * scale, "ci_high": r.ci_high * scale})
            for r in rows
        ]
        factors = [r.factor for r in compare(rows, "native").rows]
        scaled_factors = [r.factor for r in compare(scaled, "native").rows]
        ranks = [r.rank for r in compare(rows, "native").rows]
        scaled_ranks = [r.rank for r in compare(scaled, "native").rows]
        assert factors == pytest.approx(scaled_factors, rel=1e-9)
        assert ranks == scaled_ranks


class TestEmit:
    def test_empty_table_header_only(self, tmp_path):
        path = emit([], "csv", tmp_path / "empty.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("adapter,split,subset")

    def test_reemission_is_byte_identical(self, tmp_path):
        rows = [agg_row("native", 30_000.123456), agg_row("lqo", 45_000.987654)]
        a = emit(rows, "csv", tmp_path / "a.csv")
        b = emit(rows, "csv", tmp_path / "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_structured_text(self, tmp_path):
        import json

        rows = [agg_row("native", 30_000.0)]
        path = emit(rows, "structured-text", tmp_path / "rows.json")
        doc = json.loads(path.read_text())
        assert doc[0]["adapter"] == "native"
        assert doc[0]["total_end_to_end_ms"] == "30000.000"

    def test_comparison_table_format(self, tmp_path):
        table = compare([agg_row("native", 30_000.0), agg_row("lqo", 37_500.0)], "native")
        path = emit(table, "csv", tmp_path / "cmp.csv")
        text = path.read_text()
        assert "factor" in text.splitlines()[0]
        assert ",1.2," in text or ",1.2\n" in text or "1.2" in text  # one-decimal factor

    def test_lag_plot_data_one_row_per_query_and_lag(self, tmp_path):
        runs = {
            QueryId("1", "a"): [100.0, 80.0, 79.0],
            QueryId("2", "a"): [200.0, 150.0, 149.0],
        }
        summaries = successive_diffs(runs, max_lag=2)
        path = emit(summaries, "csv", tmp_path / "lags.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "lag,query_id,normalized_diff"
        assert len(lines) == 1 + 2 * 2
        assert any(line.startswith("1,1/a,-0.200") for line in lines)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit([], "yaml", tmp_path / "x.yaml")

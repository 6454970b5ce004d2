#!/usr/bin/env python3
"""How many repetitions until a query's execution time stabilizes?

Runs every query of a workload N times in succession on one session, then
reports the per-lag normalized differences (the k-th vs (k+1)-th execution,
relative to the first). The emitted CSV has one row per (lag, query), ready
for plotting. Defaults to the scripted fake DBMS, which models a warm-up on
the first run; point --dsn and --workload-dir at real infrastructure for a
real measurement.
"""

from __future__ import annotations

import argparse
import tempfile
from pathlib import Path

from qobench.adapters import PlanDirective
from qobench.dbms import connect, default_profile
from qobench.measurement import TimingPolicy, measure_query, successive_diffs
from qobench.report import emit
from qobench.workload import load_workload


def demo_workload_dir(root: Path) -> Path:
    directory = root / "queries"
    directory.mkdir()
    for family in range(1, 7):
        for variant in "abc":
            (directory / f"{family}{variant}.sql").write_text(
                f"SELECT count(*) FROM t{family} WHERE v = '{variant}'", encoding="utf-8"
            )
    return directory


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dsn", default="fake:framework")
    parser.add_argument("--workload-dir", default=None)
    parser.add_argument("--runs", type=int, default=10, help="successive executions per query")
    parser.add_argument("--max-lag", type=int, default=5)
    parser.add_argument("--out", default="successive_diffs.csv")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        directory = args.workload_dir or demo_workload_dir(Path(tmp))
        workload = load_workload(directory, name="succession")
        session = connect(args.dsn, default_profile(), allow_mismatch=True)
        try:
            per_query = {}
            for query in workload:
                record = measure_query(
                    session,
                    query.sql_text,
                    PlanDirective(),
                    TimingPolicy(k=args.runs, pick="kth", timeout_ms=300_000),
                    query_id=query.id,
                )
                per_query[query.id] = [execution for _, execution in record.repetitions]
        finally:
            session.close()

    summaries = successive_diffs(per_query, max_lag=args.max_lag)
    print(f"{'lag':<4} {'mean':>9} {'median':>9} {'min':>9} {'max':>9}")
    for s in summaries:
        print(f"{s.lag:<4} {s.mean:>9.4f} {s.median:>9.4f} {s.minimum:>9.4f} {s.maximum:>9.4f}")
    emit(summaries, "csv", args.out)
    print(f"plot data -> {args.out}")


if __name__ == "__main__":
    main()

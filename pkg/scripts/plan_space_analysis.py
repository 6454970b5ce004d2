#!/usr/bin/env python3
"""Plan-space census and bushy-vs-left-deep comparison.

Prints the ordered join-tree counts by shape for n = 2..6 relations
(cross-checked against the closed forms), then measures every physical plan
of one low-join query shape on the target DBMS and runs the rank tests
between bushy and left-deep populations, on the full distributions and on
the fast tail.

On the default fake DSN the timings are synthesized (deterministic per plan
text), so the comparison exercises the full pipeline without claiming any
real-world conclusion.
"""

from __future__ import annotations

import argparse

from qobench.adapters import PlanDirective
from qobench.dbms import connect, default_profile
from qobench.hintlang import JoinMethod, ScanMethod, TreeShape, render_hints
from qobench.measurement import TimingPolicy, measure_query
from qobench.planspace import (
    EnumSpec,
    compare_shape_populations,
    count_join_trees,
    enumerate_physical,
    join_graph,
)
from qobench.workload import QueryId


def census() -> None:
    shapes = list(TreeShape)
    header = "".join(f"{s.value:>12}" for s in shapes)
    print(f"{'n':<3}{'total':>10}{header}")
    for n in range(2, 7):
        counts = "".join(f"{count_join_trees(n, s):>12}" for s in shapes)
        print(f"{n:<3}{count_join_trees(n):>10}{counts}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dsn", default="fake:framework")
    parser.add_argument("--relations", type=int, default=4)
    parser.add_argument("--tail-quantile", type=float, default=0.1)
    parser.add_argument(
        "--sql",
        default=None,
        help="query to force plans onto; default joins t1..tn on a chain",
    )
    args = parser.parse_args()

    print("ordered join trees by shape:")
    census()

    aliases = tuple(f"t{i}" for i in range(1, args.relations + 1))
    chain = join_graph((aliases[i], aliases[i + 1]) for i in range(len(aliases) - 1))
    spec = EnumSpec(
        aliases=aliases,
        join_methods=(JoinMethod.HASH, JoinMethod.NEST_LOOP),
        scan_methods=(ScanMethod.SEQ,),
        join_graph=chain,
    )
    sql = args.sql or (
        "SELECT count(*) FROM "
        + ", ".join(f"rel{i} {a}" for i, a in enumerate(aliases, 1))
        + " WHERE "
        + " AND ".join(f"{aliases[i]}.id = {aliases[i + 1]}.id" for i in range(len(aliases) - 1))
    )

    session = connect(args.dsn, default_profile(), allow_mismatch=True)
    timings = {}
    try:
        for plan in enumerate_physical(spec):
            record = measure_query(
                session,
                sql,
                PlanDirective(hint_text=render_hints(plan)),
                TimingPolicy(k=3, pick="kth", timeout_ms=60_000),
                query_id=QueryId("census", "1"),
            )
            timings[plan] = record.execution_ms
    finally:
        session.close()

    result = compare_shape_populations(timings, tail_quantile=args.tail_quantile)
    print(f"\nmeasured {len(timings)} physical plans for {len(aliases)} relations")
    for shape, stats in result.groups.items():
        print(f"  {shape.value:<10} n={stats.count:<5} mean={stats.mean:9.2f} min={stats.minimum:9.2f}")
    full = result.full_test
    print(f"bushy vs left-deep, full distributions: U={full.statistic:.1f} p={full.p_value:.3f} ({full.method})")
    if result.tail_test is not None:
        tail = result.tail_test
        print(
            f"fast tail (q={result.tail_quantile:g}), alternative bushy faster: "
            f"U={tail.statistic:.1f} p={tail.p_value:.3f} ({tail.method})"
        )
    for note in result.notes:
        print(f"note: {note}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""End-to-end demo run against the scripted in-memory DBMS.

Builds a small workload on disk, samples a split, measures it with the
native adapter and a forced-plan file adapter, and prints the comparison
table. Point --dsn at a real server to run the same flow for real.
"""

from __future__ import annotations

import argparse
import tempfile
from pathlib import Path

from qobench.adapters import AdapterDescriptor
from qobench.dbms import default_profile
from qobench.hintlang import Join, JoinMethod, Leaf, ScanMethod, render_hints
from qobench.measurement import TimingPolicy
from qobench.report import aggregate, compare
from qobench.runner import run_benchmark
from qobench.splitter import SplitMethod, sample_split
from qobench.workload import load_workload

QUERY_TEMPLATE = "SELECT count(*) FROM title t, movie_info mi WHERE t.id = mi.movie_id AND t.kind_id = {k}"


def build_workload_dir(root: Path) -> Path:
    directory = root / "queries"
    directory.mkdir()
    for family in range(1, 5):
        for variant in "ab":
            (directory / f"{family}{variant}.sql").write_text(
                QUERY_TEMPLATE.format(k=family) + f" AND t.production_year > 19{70 + family}0",
                encoding="utf-8",
            )
    return directory


def forced_hints_dir(root: Path, ids: list[str]) -> Path:
    directory = root / "hints"
    directory.mkdir()
    plan = Join(
        JoinMethod.HASH,
        Leaf("t", ScanMethod.SEQ),
        Leaf("mi", ScanMethod.SEQ),
    )
    for compact in ids:
        (directory / f"{compact}.hints").write_text(render_hints(plan), encoding="utf-8")
    return directory


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dsn", default="fake:framework")
    parser.add_argument("--seed", type=int, default=201)
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        workload = load_workload(build_workload_dir(root), name="demo")
        split = sample_split(workload, SplitMethod("random", 0.25), args.seed)
        hints = forced_hints_dir(root, [q.id.compact for q in workload])

        adapters = [
            AdapterDescriptor(name="native", kind="native"),
            AdapterDescriptor(name="forced-hash", kind="file_hints", location=str(hints)),
        ]
        reports = run_benchmark(
            workload, split, adapters, default_profile(),
            TimingPolicy(k=3, pick="kth", timeout_ms=60_000), dsn=args.dsn,
        )
        rows = [aggregate(r, subset="all") for r in reports]
        table = compare(rows, baseline="native")
        print(f"split {split.label}: {len(split.train)} train / {len(split.test)} test")
        print(f"{'adapter':<14} {'rank':<5} {'end-to-end ms':>14} {'vs native':>12} {'timeouts':>9}")
        for row in table.rows:
            print(
                f"{row.adapter:<14} {row.rank:<5} {row.total_end_to_end_ms:>14.1f} "
                f"{row.factor:>9.1f}x {row.direction[:4]:<4} {row.timeout_count:>6}"
            )


if __name__ == "__main__":
    main()

from __future__ import annotations

import pytest
from hypothesis import settings

from qobench.workload import Query, QueryId, Workload

settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile("ci")


def synthetic_workload(family_sizes: dict[str, int], name: str = "synthetic") -> Workload:
    """Workload built in memory: families with the given variant counts."""
    variants = "abcdefghij"
    queries = []
    for family, size in family_sizes.items():
        for variant in variants[:size]:
            qid = QueryId(family, variant)
            queries.append(
                Query(
                    id=qid,
                    sql_text=f"SELECT count(*) FROM t{family} WHERE v = '{variant}'",
                    source_path=f"{family}{variant}.sql",
                )
            )
    return Workload(name=name, queries=tuple(queries))


@pytest.fixture
def job_like_workload() -> Workload:
    """113 queries over 33 families, the same counts as the join-order suite."""
    sizes = {str(f): (4 if f <= 14 else 3) for f in range(1, 34)}
    wl = synthetic_workload(sizes, name="job-like")
    assert len(wl) == 113 and len(wl.families()) == 33
    return wl


@pytest.fixture
def small_workload() -> Workload:
    return synthetic_workload({"1": 3, "2": 2, "3": 2}, name="mini")

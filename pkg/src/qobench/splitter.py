"""Seeded train/test splits over a workload.

Three sampling regimes are supported:

* ``leave_one_out`` — exactly one uniformly chosen variant of every family
  goes to the test set; everything else trains.
* ``random`` — a uniform sample of all queries goes to the test set,
  ignoring family structure.
* ``base_query`` — whole families go to the test set, so no structural
  information leaks between train and test.

Sampling runs over the workload's deterministic ordering with the pinned
SplitMix64 generator, so a (workload, method, seed) triple always yields the
same split, on any platform. Splits round-trip through a diff-stable JSON
file so they can be shared across every evaluated optimizer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import QobenchError
from .rng import SplitMix64
from .workload import QueryId, Workload, ordering_key

METHODS = ("leave_one_out", "random", "base_query")

DEFAULT_RATIO = 0.2

# Shipped seeds: three independent splits per sampling method, so published
# results can name their split as e.g. random/202.
DEFAULT_SEEDS: dict[str, tuple[int, int, int]] = {
    "leave_one_out": (101, 102, 103),
    "random": (201, 202, 203),
    "base_query": (301, 302, 303),
}


class SplitError(QobenchError):
    pass


class FamilyTooSmall(SplitError):
    """A family lacks the variants (or the workload the families) to split."""


class DegenerateSplit(SplitError):
    """The requested split would leave train or test empty."""


@dataclass(frozen=True)
class SplitMethod:
    name: str
    ratio: float = DEFAULT_RATIO

    def __post_init__(self) -> None:
        if self.name not in METHODS:
            raise ValueError(f"unknown split method {self.name!r}; expected one of {METHODS}")
        if self.name != "leave_one_out" and not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must be in (0, 1), got {self.ratio}")


@dataclass(frozen=True)
class SplitSpec:
    workload_name: str
    method: SplitMethod
    seed: int
    train: frozenset[QueryId]
    test: frozenset[QueryId]

    def subset_of(self, qid: QueryId) -> str:
        if qid in self.test:
            return "test"
        if qid in self.train:
            return "train"
        raise KeyError(qid)

    @property
    def label(self) -> str:
        return f"{self.workload_name}/{self.method.name}/{self.seed}"


def round_half_up(x: float) -> int:
    """0.5 rounds away from zero upward: 22.6 -> 23, 6.5 -> 7, 6.4 -> 6."""
    return int(x + 0.5)


def sample_split(workload: Workload, method: SplitMethod, seed: int) -> SplitSpec:
    """Draw a seeded train/test split; identical inputs give identical output."""
    rng = SplitMix64(seed)
    ids = list(workload.ids)
    families = workload.families()

    if method.name == "leave_one_out":
        small = [fam for fam, members in families.items() if len(members) < 2]
        if small:
            raise FamilyTooSmall(
                f"leave_one_out needs >=2 variants per family; too small: {sorted(small)}"
            )
        test = {members[rng.choice_index(len(members))] for members in families.values()}
    elif method.name == "random":
        size = round_half_up(method.ratio * len(ids))
        if size == 0 or size == len(ids):
            raise DegenerateSplit(f"test size {size} of {len(ids)} queries")
        test = set(rng.partial_shuffle(ids[:], size)[:size])
    else:  # base_query
        family_names = list(families)
        if len(family_names) < 2:
            raise FamilyTooSmall("base_query sampling needs at least 2 families")
        count = round_half_up(method.ratio * len(family_names))
        if count == 0 or count == len(family_names):
            raise DegenerateSplit(f"{count} test families of {len(family_names)}")
        chosen = rng.partial_shuffle(family_names[:], count)[:count]
        test = {qid for fam in chosen for qid in families[fam]}

    train = set(ids) - test
    if not train or not test:
        raise DegenerateSplit("split left train or test empty")
    return SplitSpec(
        workload_name=workload.name,
        method=method,
        seed=seed,
        train=frozenset(train),
        test=frozenset(test),
    )


def default_splits(workload: Workload, ratio: float = DEFAULT_RATIO) -> list[SplitSpec]:
    """The nine shipped splits: three seeds for each sampling method."""
    specs = []
    for name, seeds in DEFAULT_SEEDS.items():
        for seed in seeds:
            specs.append(sample_split(workload, SplitMethod(name, ratio), seed))
    return specs


def validate_split(workload: Workload, split: SplitSpec) -> list[str]:
    """Structural check; an empty report means the split is valid."""
    report: list[str] = []
    ids = set(workload.ids)
    overlap = split.train & split.test
    if overlap:
        report.append(f"disjointness: {len(overlap)} ids in both sets, e.g. {_some(overlap)}")
    missing = ids - (split.train | split.test)
    if missing:
        report.append(f"coverage: {len(missing)} workload ids unassigned, e.g. {_some(missing)}")
    extra = (split.train | split.test) - ids
    if extra:
        report.append(f"coverage: {len(extra)} ids not in workload, e.g. {_some(extra)}")
    if not split.train:
        report.append("degenerate: train set is empty")
    if not split.test:
        report.append("degenerate: test set is empty")

    families = workload.families()
    if split.method.name == "leave_one_out":
        for fam, members in families.items():
            hits = sum(1 for qid in members if qid in split.test)
            if hits != 1:
                report.append(f"one-per-family: family {fam} has {hits} test variants")
    elif split.method.name == "base_query":
        for fam, members in families.items():
            hits = sum(1 for qid in members if qid in split.test)
            if hits not in (0, len(members)):
                report.append(
                    f"family-atomicity: family {fam} straddles both sets ({hits}/{len(members)})"
                )
    return report


def _some(ids: set[QueryId], limit: int = 3) -> str:
    return ", ".join(q.text for q in sorted(ids, key=ordering_key)[:limit])


def save_split(split: SplitSpec, path: str | Path) -> None:
    """Write the split as diff-stable JSON (sorted id lists, fixed key order)."""
    doc = {
        "workload": split.workload_name,
        "method": split.method.name,
        "ratio": None if split.method.name == "leave_one_out" else split.method.ratio,
        "seed": split.seed,
        "train": [q.text for q in sorted(split.train, key=ordering_key)],
        "test": [q.text for q in sorted(split.test, key=ordering_key)],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_split(path: str | Path) -> SplitSpec:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    method = SplitMethod(doc["method"], doc["ratio"] if doc["ratio"] is not None else DEFAULT_RATIO)
    return SplitSpec(
        workload_name=doc["workload"],
        method=method,
        seed=int(doc["seed"]),
        train=frozenset(QueryId.from_text(t) for t in doc["train"]),
        test=frozenset(QueryId.from_text(t) for t in doc["test"]),
    )

"""Exhaustive enumeration of the physical plan space for low-join queries.

For n relations there are n!·Catalan(n-1) ordered join trees (outer/inner
order significant), and each tree fans out over the allowed join and scan
methods. Enumeration is a lazy deterministic stream so callers can take a
prefix without paying for the whole space; the closed-form counters below are
cross-checked against the stream in the test suite.

The join-graph filter drops trees containing a cross join (a join whose two
subtrees share no edge); pass ``enforce_connectivity=False`` to force the
literal full space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator

import numpy as np

from .errors import QobenchError
from .hintlang import (
    Join,
    JoinMethod,
    Leaf,
    PlanTree,
    ScanMethod,
    TreeShape,
    aliases,
    classify_shape,
    leaves,
)
from .stats import TestResult, mann_whitney_u

DEFAULT_RELATION_CAP = 6
DEFAULT_TAIL_QUANTILE = 0.1

ALL_JOIN_METHODS = tuple(JoinMethod)
ALL_SCAN_METHODS = tuple(ScanMethod)


class PlanSpaceError(QobenchError):
    pass


class TooManyRelations(PlanSpaceError):
    """Exhaustive enumeration beyond the configured cap is refused."""


class InsufficientData(PlanSpaceError):
    """Shape comparison needs at least one bushy and one left-deep timing."""


@dataclass(frozen=True)
class EnumSpec:
    """What to enumerate: relations, allowed methods, and optional filters."""

    aliases: tuple[str, ...]
    join_methods: tuple[JoinMethod, ...] = ALL_JOIN_METHODS
    scan_methods: tuple[ScanMethod, ...] = ALL_SCAN_METHODS
    shape_filter: frozenset[TreeShape] | None = None
    join_graph: frozenset[frozenset[str]] | None = None
    enforce_connectivity: bool = True

    def __post_init__(self) -> None:
        if len(set(self.aliases)) != len(self.aliases):
            raise ValueError("aliases must be distinct")
        if not self.join_methods or not self.scan_methods:
            raise ValueError("join_methods and scan_methods must be non-empty")
        if self.join_graph is not None:
            known = set(self.aliases)
            for edge in self.join_graph:
                if not edge <= known:
                    raise ValueError(f"join_graph edge {sorted(edge)} references unknown alias")


def join_graph(edges: Iterable[tuple[str, str]]) -> frozenset[frozenset[str]]:
    return frozenset(frozenset(e) for e in edges)


def _subtrees(names: tuple[str, ...], mask: int) -> Iterator[PlanTree]:
    bits = [i for i in range(len(names)) if mask >> i & 1]
    if len(bits) == 1:
        yield Leaf(alias=names[bits[0]])
        return
    # Every proper non-empty submask acts once as the outer set, so each
    # ordered partition (and hence each tree) is produced exactly once.
    sub = (mask - 1) & mask
    while sub:
        outer_mask = sub
        inner_mask = mask ^ outer_mask
        for outer in _subtrees(names, outer_mask):
            for inner in _subtrees(names, inner_mask):
                yield Join(method=None, outer=outer, inner=inner)
        sub = (sub - 1) & mask


def _connected(tree: PlanTree, edges: frozenset[frozenset[str]]) -> bool:
    if isinstance(tree, Leaf):
        return True
    left, right = aliases(tree.outer), aliases(tree.inner)
    crossing = any(edge & left and edge & right for edge in edges)
    return crossing and _connected(tree.outer, edges) and _connected(tree.inner, edges)


def enumerate_join_trees(spec: EnumSpec, cap: int = DEFAULT_RELATION_CAP) -> Iterator[PlanTree]:
    """Every ordered join tree over the alias set, exactly once, lazily.

    Trees with a single relation are yielded only when no shape filter is set
    (a no-join tree has no shape).
    """
    n = len(spec.aliases)
    if n < 1:
        raise ValueError("need at least one alias")
    if n > cap:
        raise TooManyRelations(f"{n} relations exceeds the exhaustive cap of {cap}")
    full = (1 << n) - 1
    for tree in _subtrees(tuple(spec.aliases), full):
        if (
            spec.join_graph is not None
            and spec.enforce_connectivity
            and not _connected(tree, spec.join_graph)
        ):
            continue
        if spec.shape_filter is not None:
            if isinstance(tree, Leaf) or classify_shape(tree) not in spec.shape_filter:
                continue
        yield tree


def _assign(tree: PlanTree, join_seq: Iterator[JoinMethod], scans: dict[str, ScanMethod]) -> PlanTree:
    if isinstance(tree, Leaf):
        return Leaf(alias=tree.alias, scan=scans[tree.alias])
    outer = _assign(tree.outer, join_seq, scans)
    inner = _assign(tree.inner, join_seq, scans)
    return Join(method=next(join_seq), outer=outer, inner=inner)


def enumerate_physical(
    spec: EnumSpec,
    cap: int = DEFAULT_RELATION_CAP,
    scan_assignment: dict[str, ScanMethod] | None = None,
) -> Iterator[PlanTree]:
    """Cartesian assignment of methods over every enumerated join tree.

    With ``scan_assignment`` given, scan methods are held fixed per relation
    (the map must cover every alias); otherwise every combination of the
    spec's scan methods over the leaves is produced.
    """
    n = len(spec.aliases)
    if scan_assignment is not None:
        missing = set(spec.aliases) - set(scan_assignment)
        if missing:
            raise ValueError(f"scan_assignment misses aliases {sorted(missing)}")
    for tree in enumerate_join_trees(spec, cap=cap):
        n_joins = n - 1 if not isinstance(tree, Leaf) else 0
        leaf_order = [leaf.alias for leaf in leaves(tree)]
        for join_combo in product(spec.join_methods, repeat=n_joins):
            if scan_assignment is not None:
                yield _assign(tree, iter(join_combo), scan_assignment)
                continue
            for scan_combo in product(spec.scan_methods, repeat=n):
                scans = dict(zip(leaf_order, scan_combo))
                yield _assign(tree, iter(join_combo), scans)


def count_join_trees(n: int, shape: TreeShape | None = None) -> int:
    """Closed-form tree counts; matches the enumerator exactly (tested <=6).

    Unfiltered: n!·Catalan(n-1). Left-deep: n! (the n=2 trees tie-break to
    left-deep, so right-deep is 0 below n=3). Chains that switch sides
    (zigzag) number n!·2^(n-2) minus the two deep shapes; everything else
    is bushy.
    """
    if not 1 <= n <= 12:
        raise ValueError("n must be in 1..12")
    total = math.factorial(n) * math.comb(2 * (n - 1), n - 1) // n
    if shape is None:
        return total
    if n == 1:
        return 0
    linear = math.factorial(n) * 2 ** (n - 2)
    counts = {
        TreeShape.LEFT_DEEP: math.factorial(n),
        TreeShape.RIGHT_DEEP: math.factorial(n) if n >= 3 else 0,
    }
    counts[TreeShape.ZIGZAG] = linear - counts[TreeShape.LEFT_DEEP] - counts[TreeShape.RIGHT_DEEP]
    counts[TreeShape.BUSHY] = total - linear
    return counts[shape]


@dataclass(frozen=True)
class ShapeStats:
    count: int
    mean: float
    minimum: float
    quantiles: tuple[tuple[float, float], ...]  # (q, value) pairs


@dataclass(frozen=True)
class ShapeComparison:
    """Bushy-vs-left-deep comparison over measured plan timings."""

    groups: dict[TreeShape, ShapeStats] = field(default_factory=dict)
    full_test: TestResult | None = None
    tail_test: TestResult | None = None
    tail_quantile: float = DEFAULT_TAIL_QUANTILE
    tail_alternative: str = "less"
    notes: tuple[str, ...] = ()


_QUANTILE_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)


def compare_shape_populations(
    timings: dict[PlanTree, float],
    tail_quantile: float = DEFAULT_TAIL_QUANTILE,
) -> ShapeComparison:
    """Partition timings by tree shape and test bushy against left-deep.

    The full-distribution test is two-sided; the tail test restricts to the
    fastest ``tail_quantile`` of the combined distribution and asks whether
    bushy plans dominate there (alternative: bushy less than left-deep).
    """
    if not timings:
        raise InsufficientData("no timings supplied")
    by_shape: dict[TreeShape, list[float]] = {}
    for tree, ms in timings.items():
        by_shape.setdefault(classify_shape(tree), []).append(float(ms))

    bushy = sorted(by_shape.get(TreeShape.BUSHY, []))
    left_deep = sorted(by_shape.get(TreeShape.LEFT_DEEP, []))
    if not bushy or not left_deep:
        raise InsufficientData("need at least one bushy and one left-deep timing")

    groups = {}
    for shape, values in sorted(by_shape.items(), key=lambda kv: kv[0].value):
        arr = np.asarray(values)
        groups[shape] = ShapeStats(
            count=len(values),
            mean=float(arr.mean()),
            minimum=float(arr.min()),
            quantiles=tuple((q, float(np.quantile(arr, q))) for q in _QUANTILE_GRID),
        )

    full = mann_whitney_u(bushy, left_deep, alternative="two_sided")

    combined = np.asarray(bushy + left_deep)
    threshold = float(np.quantile(combined, tail_quantile))
    tail_bushy = [v for v in bushy if v <= threshold]
    tail_left = [v for v in left_deep if v <= threshold]
    notes = [f"tail = fastest {tail_quantile:g} quantile of the combined distribution"]
    tail: TestResult | None = None
    if tail_bushy and tail_left:
        tail = mann_whitney_u(tail_bushy, tail_left, alternative="less")
    else:
        notes.append("tail test skipped: one side empty below the tail threshold")
    return ShapeComparison(
        groups=groups,
        full_test=full,
        tail_test=tail,
        tail_quantile=tail_quantile,
        tail_alternative="less",
        notes=tuple(notes),
    )

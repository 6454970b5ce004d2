"""Physical plans as binary join trees, and the hint-comment grammar.

A plan is a full binary tree: leaves carry a relation alias and a scan
method, inner nodes carry a join method. Outer/inner child order is
significant — ``(a b)`` and ``(b a)`` are different plans.

The rendered hint comment pins the whole plan for the hint extension::

    /*+ Leading(((a b) c)) HashJoin(a b) NestLoop(a b c)
        SeqScan(a) IndexScan(b) SeqScan(c) */

Grammar (rendered output is byte-exact): the comment opens ``/*+ `` and
closes `` */``; atoms are separated by single spaces; ``Leading(<group>)``
with ``<group> ::= alias | (<group> <group>)``; each join atom names the
sorted alias set of its subtree; each leaf gets exactly one scan atom.
Join atoms are emitted in post-order (outer subtree first), scan atoms in
leaf order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from .errors import QobenchError


class ScanMethod(Enum):
    SEQ = "SeqScan"
    INDEX = "IndexScan"
    INDEX_ONLY = "IndexOnlyScan"
    BITMAP = "BitmapScan"
    TID = "TidScan"


class JoinMethod(Enum):
    NEST_LOOP = "NestLoop"
    HASH = "HashJoin"
    MERGE = "MergeJoin"


class TreeShape(Enum):
    LEFT_DEEP = "left_deep"
    RIGHT_DEEP = "right_deep"
    ZIGZAG = "zigzag"
    BUSHY = "bushy"


_SCAN_BY_NAME = {m.value: m for m in ScanMethod}
_JOIN_BY_NAME = {m.value: m for m in JoinMethod}


class HintError(QobenchError):
    pass


class DuplicateAlias(HintError):
    """The same relation alias appears on two leaves."""


class UnassignedMethod(HintError):
    """A node lacks the scan/join method required for rendering."""


class HintSyntaxError(HintError):
    """Malformed hint text; ``position`` is the offending character offset."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownAtom(HintError):
    """An atom name outside the join/scan method vocabulary."""


@dataclass(frozen=True)
class Leaf:
    alias: str
    scan: ScanMethod | None = None


@dataclass(frozen=True)
class Join:
    method: JoinMethod | None
    outer: "PlanTree"
    inner: "PlanTree"


PlanTree = Union[Leaf, Join]


def leaves(tree: PlanTree) -> Iterator[Leaf]:
    """Leaves in left-to-right (outer-first) order."""
    if isinstance(tree, Leaf):
        yield tree
    else:
        yield from leaves(tree.outer)
        yield from leaves(tree.inner)


def joins(tree: PlanTree) -> Iterator[Join]:
    """Inner nodes in post-order (children before parent, outer first)."""
    if isinstance(tree, Join):
        yield from joins(tree.outer)
        yield from joins(tree.inner)
        yield tree


def aliases(tree: PlanTree) -> frozenset[str]:
    return frozenset(leaf.alias for leaf in leaves(tree))


def check_tree(tree: PlanTree) -> None:
    """Raise DuplicateAlias unless all leaf aliases are distinct."""
    seen: set[str] = set()
    for leaf in leaves(tree):
        if leaf.alias in seen:
            raise DuplicateAlias(f"alias {leaf.alias!r} appears more than once")
        seen.add(leaf.alias)


def leading_clause(tree: PlanTree) -> str:
    """The nested-parenthesis order group, without the Leading( ) wrapper."""
    if isinstance(tree, Leaf):
        return tree.alias
    return f"({leading_clause(tree.outer)} {leading_clause(tree.inner)})"


def render_hints(tree: PlanTree) -> str:
    """Render the full hint comment pinning join order, join and scan methods."""
    check_tree(tree)
    atoms: list[str] = [f"Leading({leading_clause(tree)})"]
    for node in joins(tree):
        if node.method is None:
            raise UnassignedMethod("join node has no join method assigned")
        names = " ".join(sorted(aliases(node)))
        atoms.append(f"{node.method.value}({names})")
    for leaf in leaves(tree):
        if leaf.scan is None:
            raise UnassignedMethod(f"leaf {leaf.alias!r} has no scan method assigned")
        atoms.append(f"{leaf.scan.value}({leaf.alias})")
    return "/*+ " + " ".join(atoms) + " */"


@dataclass(frozen=True)
class HintAtom:
    name: str
    args: tuple[str, ...]

    @property
    def is_join(self) -> bool:
        return self.name in _JOIN_BY_NAME

    @property
    def is_scan(self) -> bool:
        return self.name in _SCAN_BY_NAME


LeadingGroup = Union[str, tuple]  # alias | (outer_group, inner_group)


@dataclass(frozen=True)
class HintSet:
    """Parsed hint comment: the leading clause text plus join/scan atoms."""

    leading: str
    atoms: tuple[HintAtom, ...] = field(default_factory=tuple)

    @property
    def join_atoms(self) -> tuple[HintAtom, ...]:
        return tuple(a for a in self.atoms if a.is_join)

    @property
    def scan_atoms(self) -> tuple[HintAtom, ...]:
        return tuple(a for a in self.atoms if a.is_scan)

    def leading_group(self) -> LeadingGroup:
        return _parse_group_text(self.leading)

    def join_methods(self) -> dict[frozenset[str], JoinMethod]:
        return {frozenset(a.args): _JOIN_BY_NAME[a.name] for a in self.join_atoms}

    def scan_methods(self) -> dict[str, ScanMethod]:
        return {a.args[0]: _SCAN_BY_NAME[a.name] for a in self.scan_atoms}

    def to_plan_tree(self) -> PlanTree:
        """Rebuild the PlanTree; requires one scan atom per alias and one join
        atom per join level."""
        joins_by_set = self.join_methods()
        scans = self.scan_methods()

        def build(group: LeadingGroup) -> PlanTree:
            if isinstance(group, str):
                if group not in scans:
                    raise UnassignedMethod(f"no scan atom for alias {group!r}")
                return Leaf(alias=group, scan=scans[group])
            outer, inner = build(group[0]), build(group[1])
            key = aliases(outer) | aliases(inner)
            if key not in joins_by_set:
                raise UnassignedMethod(f"no join atom for alias set {sorted(key)}")
            return Join(method=joins_by_set[key], outer=outer, inner=inner)

        return build(self.leading_group())


class _Scanner:
    def __init__(self, text: str, offset: int = 0) -> None:
        self.text = text
        self.pos = offset

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise HintSyntaxError(f"expected {ch!r}, found {self.peek()!r}", self.pos)
        self.pos += 1

    def word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_$."
        ):
            self.pos += 1
        if self.pos == start:
            raise HintSyntaxError(f"expected a name, found {self.peek()!r}", start)
        return self.text[start : self.pos]


def _parse_group(scanner: _Scanner) -> LeadingGroup:
    scanner.skip_ws()
    if scanner.peek() == "(":
        scanner.expect("(")
        outer = _parse_group(scanner)
        inner = _parse_group(scanner)
        scanner.skip_ws()
        scanner.expect(")")
        return (outer, inner)
    return scanner.word()


def _parse_group_text(text: str) -> LeadingGroup:
    scanner = _Scanner(text)
    group = _parse_group(scanner)
    scanner.skip_ws()
    if scanner.pos != len(scanner.text):
        raise HintSyntaxError("trailing input after leading group", scanner.pos)
    return group


def _group_aliases(group: LeadingGroup) -> list[str]:
    if isinstance(group, str):
        return [group]
    return _group_aliases(group[0]) + _group_aliases(group[1])


def _render_group(group: LeadingGroup) -> str:
    if isinstance(group, str):
        return group
    return f"({_render_group(group[0])} {_render_group(group[1])})"


def parse_hints(text: str) -> HintSet:
    """Parse a ``/*+ ... */`` comment into a HintSet, validating that atoms
    reference only aliases from the leading clause and that no alias gets two
    scan atoms."""
    stripped = text.strip()
    if not stripped.startswith("/*+"):
        raise HintSyntaxError("hint comment must open with '/*+'", 0)
    if not stripped.endswith("*/"):
        raise HintSyntaxError("hint comment must close with '*/'", len(text) - 1)
    body_start = text.index("/*+") + 3
    body_end = text.rindex("*/")
    scanner = _Scanner(text[:body_end], offset=body_start)

    leading: LeadingGroup | None = None
    atoms: list[HintAtom] = []
    while True:
        scanner.skip_ws()
        if scanner.pos >= body_end:
            break
        name = scanner.word()
        scanner.expect("(")
        if name == "Leading":
            if leading is not None:
                raise HintSyntaxError("duplicate Leading clause", scanner.pos)
            leading = _parse_group(scanner)
            scanner.skip_ws()
            scanner.expect(")")
            continue
        if name not in _JOIN_BY_NAME and name not in _SCAN_BY_NAME:
            raise UnknownAtom(f"unknown atom {name!r}")
        args: list[str] = []
        while True:
            scanner.skip_ws()
            if scanner.peek() == ")":
                scanner.expect(")")
                break
            args.append(scanner.word())
        if not args:
            raise HintSyntaxError(f"atom {name} has no arguments", scanner.pos)
        if name in _SCAN_BY_NAME and len(args) != 1:
            raise HintSyntaxError(f"scan atom {name} takes exactly one alias", scanner.pos)
        atoms.append(HintAtom(name=name, args=tuple(args)))

    if leading is None:
        raise HintSyntaxError("missing Leading clause", body_start)
    known = set(_group_aliases(leading))
    if len(known) != len(_group_aliases(leading)):
        raise DuplicateAlias("alias repeated inside the Leading clause")
    scanned: set[str] = set()
    for atom in atoms:
        for alias in atom.args:
            if alias not in known:
                raise HintSyntaxError(
                    f"atom {atom.name} references alias {alias!r} not in Leading", body_start
                )
        if atom.is_scan:
            if atom.args[0] in scanned:
                raise DuplicateAlias(f"two scan atoms for alias {atom.args[0]!r}")
            scanned.add(atom.args[0])
    return HintSet(leading=_render_group(leading), atoms=tuple(atoms))


def classify_shape(tree: PlanTree) -> TreeShape:
    """Total, mutually exclusive shape classification for trees with >=1 join.

    A single-join tree counts as left-deep; zigzag means every join touches a
    base relation but the chain switches sides; bushy means some join combines
    two composite subtrees.
    """
    if isinstance(tree, Leaf):
        raise ValueError("shape classification needs at least one join")
    all_inner_leaf = True
    all_outer_leaf = True
    some_leafless = False
    for node in joins(tree):
        inner_leaf = isinstance(node.inner, Leaf)
        outer_leaf = isinstance(node.outer, Leaf)
        all_inner_leaf &= inner_leaf
        all_outer_leaf &= outer_leaf
        some_leafless |= not (inner_leaf or outer_leaf)
    if all_inner_leaf:
        return TreeShape.LEFT_DEEP
    if all_outer_leaf:
        return TreeShape.RIGHT_DEEP
    if some_leafless:
        return TreeShape.BUSHY
    return TreeShape.ZIGZAG

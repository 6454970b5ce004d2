"""Query workloads loaded from directories of .sql files.

Two directory layouts are supported:

* ``job``: flat files named ``<family><variant>.sql`` where the family is the
  longest leading run of digits and the variant is the remaining letters,
  e.g. ``1a.sql`` or ``33c.sql``.
* ``template_dir``: one directory per family, one file per variant,
  e.g. ``q16/042.sql``.

Workloads are immutable and deterministically ordered (numeric-aware on the
family, so family ``2`` sorts before family ``10``), which makes every
downstream artifact independent of filesystem enumeration order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import QobenchError

CONVENTIONS = ("job", "template_dir")

_JOB_STEM = re.compile(r"^(\d+)([A-Za-z]+)$")


class WorkloadError(QobenchError):
    pass


class MalformedName(WorkloadError):
    """Filename does not match the naming convention's grammar."""


class EmptyWorkload(WorkloadError):
    """No .sql files found under the workload directory."""


class DuplicateQueryId(WorkloadError):
    """Two files decompose to the same (family, variant)."""


class EmptyQuery(WorkloadError):
    """A .sql file contains no statement."""


class MultipleStatements(WorkloadError):
    """A .sql file contains more than one statement."""


@dataclass(frozen=True, order=True)
class QueryId:
    """Identity of a template-derived query: base template plus variation."""

    family: str
    variant: str

    def __post_init__(self) -> None:
        if not self.family or not self.variant:
            raise ValueError("family and variant must be non-empty")

    @property
    def text(self) -> str:
        """Unambiguous file form, ``<family>/<variant>``."""
        return f"{self.family}/{self.variant}"

    @property
    def compact(self) -> str:
        """Concatenated form used on the adapter wire, ``<family><variant>``."""
        return f"{self.family}{self.variant}"

    @classmethod
    def from_text(cls, text: str) -> "QueryId":
        family, sep, variant = text.partition("/")
        if not sep:
            raise ValueError(f"not a <family>/<variant> id: {text!r}")
        return cls(family, variant)


@dataclass(frozen=True)
class Query:
    id: QueryId
    sql_text: str
    source_path: str


@dataclass(frozen=True)
class Workload:
    """A named, deterministically ordered collection of queries."""

    name: str
    queries: tuple[Query, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ids = [q.id for q in self.queries]
        if len(set(ids)) != len(ids):
            raise DuplicateQueryId(f"workload {self.name!r} has duplicate query ids")

    def __iter__(self) -> Iterator[Query]:
        return iter(self.queries)

    def __len__(self) -> int:
        return len(self.queries)

    @property
    def ids(self) -> tuple[QueryId, ...]:
        return tuple(q.id for q in self.queries)

    def families(self) -> dict[str, tuple[QueryId, ...]]:
        """Query ids grouped by family, preserving workload order."""
        groups: dict[str, list[QueryId]] = {}
        for q in self.queries:
            groups.setdefault(q.id.family, []).append(q.id)
        return {fam: tuple(ids) for fam, ids in groups.items()}

    def query(self, qid: QueryId) -> Query:
        for q in self.queries:
            if q.id == qid:
                return q
        raise KeyError(qid)


def natural_key(text: str) -> tuple:
    """Sort key comparing digit runs numerically: '2a' < '10a'."""
    parts = re.split(r"(\d+)", text)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p)


def ordering_key(qid: QueryId) -> tuple:
    return (natural_key(qid.family), qid.variant)


def parse_query_id(filename: str, convention: str) -> QueryId:
    """Decompose a .sql filename into (family, variant) per the convention."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    path = Path(filename)
    if path.suffix != ".sql":
        raise MalformedName(f"{filename!r} does not end in .sql")
    if convention == "job":
        match = _JOB_STEM.match(path.stem)
        if match is None:
            raise MalformedName(
                f"{filename!r}: stem {path.stem!r} is not <digits><letters>"
            )
        return QueryId(family=match.group(1), variant=match.group(2))
    # template_dir: parent directory is the family, stem is the variant
    if path.parent == Path("."):
        raise MalformedName(f"{filename!r} has no family directory")
    if not path.stem:
        raise MalformedName(f"{filename!r} has an empty variant stem")
    return QueryId(family=path.parent.name, variant=path.stem)


def split_statements(sql: str) -> list[str]:
    """Split SQL text on top-level semicolons.

    Quotes ('', "" and $tag$..$tag$), line comments and block comments are
    respected; this is statement *counting*, not SQL validation.
    """
    statements: list[str] = []
    buf: list[str] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch == "'" or ch == '"':
            quote = ch
            buf.append(ch)
            i += 1
            while i < n:
                buf.append(sql[i])
                if sql[i] == quote:
                    i += 1
                    break
                i += 1
            continue
        if ch == "$":
            tag = re.match(r"\$[A-Za-z_]*\$", sql[i:])
            if tag:
                end = sql.find(tag.group(0), i + len(tag.group(0)))
                end = n if end < 0 else end + len(tag.group(0))
                buf.append(sql[i:end])
                i = end
                continue
        if sql.startswith("--", i):
            end = sql.find("\n", i)
            end = n if end < 0 else end
            buf.append(sql[i:end])
            i = end
            continue
        if sql.startswith("/*", i):
            end = sql.find("*/", i + 2)
            end = n if end < 0 else end + 2
            buf.append(sql[i:end])
            i = end
            continue
        if ch == ";":
            statements.append("".join(buf))
            buf = []
            i += 1
            continue
        buf.append(ch)
        i += 1
    statements.append("".join(buf))
    return [s for s in statements if s.strip()]


def _read_query(path: Path, qid: QueryId) -> Query:
    sql = path.read_text(encoding="utf-8")
    parts = split_statements(sql)
    if not parts:
        raise EmptyQuery(f"{path}: no statement found")
    if len(parts) > 1:
        raise MultipleStatements(f"{path}: {len(parts)} statements, expected 1")
    return Query(id=qid, sql_text=sql.strip(), source_path=str(path))


def load_workload(directory: str | Path, name: str, convention: str = "job") -> Workload:
    """Load every .sql file under ``directory`` into a Workload.

    Pure function of the directory contents: byte-identical inputs produce an
    identical Workload regardless of platform or enumeration order.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    root = Path(directory)
    pattern = "*.sql" if convention == "job" else "*/*.sql"
    files = list(root.glob(pattern))
    if not files:
        raise EmptyWorkload(f"no {pattern} files under {root}")
    entries: list[tuple[QueryId, Path]] = []
    seen: dict[QueryId, Path] = {}
    for path in files:
        rel = path.relative_to(root)
        qid = parse_query_id(str(rel), convention)
        if qid in seen:
            raise DuplicateQueryId(f"{path} and {seen[qid]} both map to {qid.text}")
        seen[qid] = path
        entries.append((qid, path))
    entries.sort(key=lambda e: ordering_key(e[0]))
    return Workload(name=name, queries=tuple(_read_query(p, qid) for qid, p in entries))

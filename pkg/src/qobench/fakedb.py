"""Scripted in-memory stand-in for a DBMS connection.

Answers SET/SHOW like a real session, and responds to instrumented-explain
statements from a timing script, so the measurement pipeline, the runner and
adapter development all work without a server. Connect to it with the DSN
``fake:`` (optionally ``fake:framework`` to boot with the shipped profile's
values already in place, mimicking a correctly tuned server).

Timing scripts map a key (substring of the executed statement, typically the
query's marker comment or its full text) to the successive per-run
``(planning_ms, execution_ms)`` pairs; runs beyond the list repeat the last
pair, which is exactly the hot-cache plateau. Without a script, times are
synthesized deterministically from the statement text with a slower first
run.
"""

from __future__ import annotations

import hashlib
import json
import re

from .dbms import HintRejected, QueryFailed, StatementTimeout, _REGISTRY

# Stock server defaults (small memory, autovacuum on, genetic optimizer on).
STOCK_SETTINGS: dict[str, str] = {
    "work_mem": "4MB",
    "temp_buffers": "8MB",
    "effective_cache_size": "4GB",
    "shared_buffers": "128MB",
    "max_worker_processes": "2",
    "max_parallel_workers": "8",
    "max_parallel_workers_per_gather": "8",
    "geqo": "on",
    "geqo_threshold": "12",
    "join_collapse_limit": "8",
    "from_collapse_limit": "8",
    "statement_timeout": "0",
    "autovacuum": "on",
}
for _name, (_scope, _kind, _unit) in _REGISTRY.items():
    if _name.startswith("enable_"):
        STOCK_SETTINGS[_name] = "on"

# What the shipped measurement profile expects, for a pre-tuned fake server.
FRAMEWORK_SETTINGS: dict[str, str] = {
    **STOCK_SETTINGS,
    "work_mem": "4GB",
    "temp_buffers": "32GB",
    "effective_cache_size": "32GB",
    "shared_buffers": "32GB",
    "max_worker_processes": "8",
    "geqo": "off",
    "autovacuum": "off",
}

_EXPLAIN_PREFIX = re.compile(r"^\s*EXPLAIN\s*\(([^)]*)\)\s*", re.IGNORECASE)
_DEFAULT_TABLES = ("title", "movie_info", "cast_info")


class FakeDbms:
    """Driver-protocol fake: one instance is one connection."""

    def __init__(
        self,
        server_settings: dict[str, str] | None = None,
        script: dict[str, list[tuple[float, float]]] | None = None,
        failures: dict[str, str] | None = None,
        tables: tuple[str, ...] = _DEFAULT_TABLES,
        base_ms: float = 20.0,
    ) -> None:
        self.settings = dict(STOCK_SETTINGS)
        if server_settings:
            self.settings.update(server_settings)
        self.script = dict(script or {})
        self.failures = dict(failures or {})
        self.tables = set(tables)
        self.base_ms = base_ms
        self.runs: dict[str, int] = {}
        self.log: list[str] = []
        self.closed = False

    @classmethod
    def from_dsn(cls, dsn: str) -> "FakeDbms":
        if dsn.strip() in ("fake:framework", "fake://framework"):
            return cls(server_settings=FRAMEWORK_SETTINGS)
        return cls()

    # -- driver protocol ------------------------------------------------

    def execute(self, sql: str) -> list[tuple]:
        if self.closed:
            raise QueryFailed("connection is closed")
        self.log.append(sql)
        stripped = sql.strip()
        word = stripped.split(None, 1)[0].upper() if stripped else ""
        if word == "SET":
            return self._set(stripped)
        if word == "SHOW":
            return self._show(stripped)
        if word == "EXPLAIN":
            return self._explain(stripped)
        if word == "ANALYZE":
            return self._analyze(stripped)
        if word in ("SELECT", "BEGIN", "COMMIT", "ROLLBACK", "DELETE", "CREATE", "DROP", ""):
            return []
        raise QueryFailed(f"fake DBMS does not understand {word!r}")

    def close(self) -> None:
        self.closed = True

    # -- statement handlers ----------------------------------------------

    def _set(self, sql: str) -> list[tuple]:
        match = re.match(r"SET\s+(\w+)\s*(?:=|TO)\s*(.+)$", sql, re.IGNORECASE)
        if not match:
            raise QueryFailed(f"cannot parse {sql!r}")
        name = match.group(1).lower()
        value = match.group(2).strip().strip("'\"")
        if name not in self.settings:
            raise QueryFailed(f'unrecognized configuration parameter "{name}"')
        scope = _REGISTRY.get(name, ("session",))[0]
        if scope == "server":
            raise QueryFailed(f'parameter "{name}" cannot be changed without restarting the server')
        self.settings[name] = value
        return []

    def _show(self, sql: str) -> list[tuple]:
        name = sql.split(None, 1)[1].strip().rstrip(";").lower()
        if name not in self.settings:
            raise QueryFailed(f'unrecognized configuration parameter "{name}"')
        return [(self.settings[name],)]

    def _analyze(self, sql: str) -> list[tuple]:
        rest = sql.split(None, 1)
        if len(rest) > 1:
            table = rest[1].strip().rstrip(";")
            if table and table not in self.tables:
                raise QueryFailed(f'relation "{table}" does not exist')
        return []

    def _explain(self, sql: str) -> list[tuple]:
        match = _EXPLAIN_PREFIX.match(sql)
        if not match:
            raise QueryFailed("fake DBMS only understands EXPLAIN (ANALYZE, FORMAT JSON) ...")
        inner = sql[match.end() :]
        for key, kind in self.failures.items():
            if key in inner:
                if kind == "hint_rejected":
                    raise HintRejected(f"pg_hint_plan: rejected hint for {key!r}")
                raise QueryFailed(f"scripted failure for {key!r}: {kind}")
        planning, execution = self._times_for(inner)
        timeout = float(self.settings.get("statement_timeout", "0") or 0)
        if timeout > 0 and execution > timeout:
            raise StatementTimeout("canceling statement due to statement timeout")
        doc = [
            {
                "Plan": {"Node Type": "Fake", "Actual Total Time": execution},
                "Planning Time": planning,
                "Execution Time": execution,
            }
        ]
        return [(json.dumps(doc),)]

    def _times_for(self, inner: str) -> tuple[float, float]:
        for key, runs in self.script.items():
            if key in inner:
                idx = self.runs.get(key, 0)
                self.runs[key] = idx + 1
                return runs[min(idx, len(runs) - 1)]
        idx = self.runs.get(inner, 0)
        self.runs[inner] = idx + 1
        digest = hashlib.sha256(inner.encode("utf-8")).digest()
        base = self.base_ms + digest[0] / 4.0
        execution = base * (1.25 if idx == 0 else 1.0)
        planning = 1.0 + digest[1] / 100.0
        return round(planning, 3), round(execution, 3)

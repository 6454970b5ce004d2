"""DBMS sessions: configuration profiles, verification, and the command channel.

A session is a thin wrapper over a Driver (one open connection). Profiles
list parameters with their expected values; session-scope parameters are
applied with SET at connect time, server-scope parameters are verify-only —
the harness guarantees stated conditions, it never mutates a server.

Value comparison is unit-aware (4GB == 4096MB == 4194304kB), because SHOW
reports whatever unit the server finds prettiest.

Drivers:
* psycopg2, when importable (``postgresql://`` DSNs);
* a persistent ``psql`` co-process fallback, so the harness works on any box
  with client tools but no Python driver;
* the in-repo scripted fake (``fake:`` DSNs), used by tests, demo scripts and
  adapter development.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import time
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Protocol, Sequence

from .errors import QobenchError


class DbmsError(QobenchError):
    pass


class ConnectionFailed(DbmsError):
    pass


class QueryFailed(DbmsError):
    pass


class StatementTimeout(QueryFailed):
    """The engine canceled the statement at the session's timeout."""


class HintRejected(QueryFailed):
    """The hint comment was refused by the hint extension."""


class UnknownParameter(DbmsError):
    pass


class ConfigMismatchError(DbmsError):
    def __init__(self, mismatches: Sequence["ConfigMismatch"]) -> None:
        lines = ", ".join(str(m) for m in mismatches)
        super().__init__(f"configuration mismatch: {lines}")
        self.mismatches = list(mismatches)


# --- parameter registry ----------------------------------------------------

SESSION, SERVER = "session", "server"

# kind drives normalization: mem values compare in bytes, time in ms.
# unit is the base unit the server assumes for bare numbers.
_REGISTRY: dict[str, tuple[str, str, str | None]] = {
    # name: (scope, kind, bare-number unit)
    "work_mem": (SESSION, "mem", "kB"),
    "temp_buffers": (SESSION, "mem", "8kB"),
    "effective_cache_size": (SESSION, "mem", "8kB"),
    "shared_buffers": (SERVER, "mem", "8kB"),
    "max_worker_processes": (SERVER, "int", None),
    "max_parallel_workers": (SESSION, "int", None),
    "max_parallel_workers_per_gather": (SESSION, "int", None),
    "geqo": (SESSION, "bool", None),
    "geqo_threshold": (SESSION, "int", None),
    "join_collapse_limit": (SESSION, "int", None),
    "from_collapse_limit": (SESSION, "int", None),
    "statement_timeout": (SESSION, "time", "ms"),
    "autovacuum": (SERVER, "bool", None),
}
for _toggle in (
    "enable_bitmapscan",
    "enable_tidscan",
    "enable_seqscan",
    "enable_indexscan",
    "enable_indexonlyscan",
    "enable_nestloop",
    "enable_hashjoin",
    "enable_mergejoin",
    "enable_sort",
    "enable_material",
    "enable_hashagg",
    "enable_gathermerge",
    "enable_memoize",
    "enable_incremental_sort",
    "enable_parallel_append",
    "enable_parallel_hash",
):
    _REGISTRY[_toggle] = (SESSION, "bool", None)


def parameter_scope(name: str) -> str:
    try:
        return _REGISTRY[name][0]
    except KeyError:
        raise UnknownParameter(f"parameter {name!r} is not in the registry") from None


_MEM_UNITS = {"b": 1, "kb": 1024, "8kb": 8192, "mb": 1024**2, "gb": 1024**3, "tb": 1024**4}
_TIME_UNITS = {"us": 0.001, "ms": 1.0, "s": 1000.0, "min": 60_000.0, "h": 3_600_000.0, "d": 86_400_000.0}
_BOOL_WORDS = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _split_unit(text: str) -> tuple[float, str] | None:
    text = text.strip()
    i = 0
    while i < len(text) and (text[i].isdigit() or text[i] in ".+-"):
        i += 1
    if i == 0:
        return None
    try:
        number = float(text[:i])
    except ValueError:
        return None
    return number, text[i:].strip()


def normalize_value(name: str, value: str) -> object:
    """Canonical comparison form of a parameter value (unit-aware)."""
    kind = _REGISTRY.get(name, (None, "text", None))[1]
    bare_unit = _REGISTRY.get(name, (None, None, None))[2]
    text = str(value).strip()
    if kind == "bool":
        if text.lower() in _BOOL_WORDS:
            return _BOOL_WORDS[text.lower()]
        return text.lower()
    if kind in ("mem", "time"):
        units = _MEM_UNITS if kind == "mem" else _TIME_UNITS
        parsed = _split_unit(text)
        if parsed is None:
            return text.lower()
        number, unit = parsed
        if not unit:
            unit = bare_unit or ""
        factor = units.get(unit.lower().replace(" ", ""))
        if factor is None:
            return text.lower()
        return number * factor
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            return text.lower()
    try:
        return float(text)
    except ValueError:
        return text.lower()


# --- profiles ---------------------------------------------------------------

GEQO_POLICIES = ("on_for_native_only", "always_on", "always_off")


@dataclass(frozen=True)
class ConfigParam:
    name: str
    expected: str
    scope: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("parameter name must be non-empty")
        scope = self.scope or parameter_scope(self.name)
        if scope not in (SESSION, SERVER):
            raise ValueError(f"scope must be session or server, got {scope!r}")
        object.__setattr__(self, "scope", scope)


@dataclass(frozen=True)
class ConfigProfile:
    name: str
    params: tuple[ConfigParam, ...] = ()
    geqo_policy: str = "on_for_native_only"

    def __post_init__(self) -> None:
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"profile {self.name!r} repeats a parameter")
        if self.geqo_policy not in GEQO_POLICIES:
            raise ValueError(f"geqo_policy must be one of {GEQO_POLICIES}")

    def session_params(self) -> tuple[ConfigParam, ...]:
        return tuple(p for p in self.params if p.scope == SESSION)

    def get(self, name: str) -> ConfigParam | None:
        for p in self.params:
            if p.name == name:
                return p
        return None


def default_profile() -> ConfigProfile:
    """The shipped measurement profile: big memory, 8 workers, autovacuum off,
    genetic optimizer off unless the engine plans natively."""
    return ConfigProfile(
        name="framework-default",
        params=(
            ConfigParam("work_mem", "4GB"),
            ConfigParam("shared_buffers", "32GB"),
            ConfigParam("temp_buffers", "32GB"),
            ConfigParam("effective_cache_size", "32GB"),
            ConfigParam("max_worker_processes", "8"),
            ConfigParam("geqo", "off"),
            ConfigParam("autovacuum", "off"),
        ),
        geqo_policy="on_for_native_only",
    )


def save_profile(profile: ConfigProfile, path: str | Path) -> None:
    doc = {
        "name": profile.name,
        "geqo_policy": profile.geqo_policy,
        "params": [
            {"name": p.name, "expected": p.expected, "scope": p.scope} for p in profile.params
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_profile(path: str | Path) -> ConfigProfile:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    params = tuple(
        ConfigParam(p["name"], str(p["expected"]), p.get("scope", "")) for p in doc["params"]
    )
    return ConfigProfile(
        name=doc["name"], params=params, geqo_policy=doc.get("geqo_policy", "on_for_native_only")
    )


# --- drivers ----------------------------------------------------------------


class Driver(Protocol):
    """One open connection; execute returns rows as tuples."""

    def execute(self, sql: str) -> list[tuple]: ...

    def close(self) -> None: ...


class Psycopg2Driver:
    def __init__(self, dsn: str) -> None:
        try:
            import psycopg2  # type: ignore[import-not-found]
        except ImportError as exc:
            raise ConnectionFailed("psycopg2 is not installed") from exc
        try:
            self._conn = psycopg2.connect(dsn)
        except Exception as exc:
            raise ConnectionFailed(f"could not connect to {dsn!r}: {exc}") from exc
        self._conn.autocommit = True
        self._psycopg2 = psycopg2

    def execute(self, sql: str) -> list[tuple]:
        errors = self._psycopg2.errors
        try:
            with self._conn.cursor() as cur:
                cur.execute(sql)
                if cur.description is None:
                    return []
                return [tuple(row) for row in cur.fetchall()]
        except errors.QueryCanceled as exc:
            raise StatementTimeout(str(exc)) from exc
        except Exception as exc:
            if "pg_hint_plan" in str(exc) or "hint" in str(exc).lower():
                raise HintRejected(str(exc)) from exc
            raise QueryFailed(str(exc)) from exc

    def close(self) -> None:
        self._conn.close()


class PsqlDriver:
    """Persistent psql co-process, so SET state survives across statements.

    Statements run in unaligned tuples-only mode; a sentinel echo marks the
    end of every result and carries the error flag. Timing numbers are read
    from the engine's own reports, so the extra process hop never pollutes a
    measurement.
    """

    def __init__(self, dsn: str, psql: str = "psql") -> None:
        if shutil.which(psql) is None:
            raise ConnectionFailed(f"{psql!r} not found on PATH")
        self._proc = subprocess.Popen(
            [psql, dsn, "--no-psqlrc", "--quiet", "-v", "ON_ERROR_STOP=0", "-tA"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            self.execute("SELECT 1")
        except QueryFailed as exc:
            raise ConnectionFailed(f"psql could not reach {dsn!r}: {exc}") from exc

    def execute(self, sql: str) -> list[tuple]:
        if self._proc.poll() is not None:
            raise QueryFailed("psql process has exited")
        sentinel = f"__qobench_done_{uuid.uuid4().hex}__"
        assert self._proc.stdin is not None and self._proc.stdout is not None
        self._proc.stdin.write(sql.rstrip().rstrip(";") + ";\n")
        self._proc.stdin.write(f"\\echo {sentinel} :ERROR\n")
        self._proc.stdin.flush()
        lines: list[str] = []
        while True:
            line = self._proc.stdout.readline()
            if not line:
                raise QueryFailed("psql closed its output stream")
            if line.startswith(sentinel):
                failed = line.strip().endswith("true")
                break
            lines.append(line.rstrip("\n"))
        if failed:
            message = self._drain_stderr()
            if "statement timeout" in message or "canceling statement" in message:
                raise StatementTimeout(message)
            if "pg_hint_plan" in message:
                raise HintRejected(message)
            raise QueryFailed(message or "psql reported an error")
        return [tuple(line.split("|")) for line in lines if line]

    def _drain_stderr(self) -> str:
        # stderr is only read after a failure; anything buffered belongs to it
        import select

        assert self._proc.stderr is not None
        chunks: list[str] = []
        while select.select([self._proc.stderr], [], [], 0.05)[0]:
            chunk = self._proc.stderr.readline()
            if not chunk:
                break
            chunks.append(chunk)
        return "".join(chunks).strip()

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write("\\q\n")
                self._proc.stdin.flush()
            except BrokenPipeError:
                pass
            self._proc.wait(timeout=5)


def driver_for_dsn(dsn: str) -> Driver:
    if dsn.startswith("fake:"):
        from .fakedb import FakeDbms

        return FakeDbms.from_dsn(dsn)
    try:
        import psycopg2  # type: ignore[import-not-found]  # noqa: F401

        return Psycopg2Driver(dsn)
    except ImportError:
        pass
    if shutil.which("psql"):
        return PsqlDriver(dsn)
    raise ConnectionFailed(
        "no way to reach a DBMS: psycopg2 is not installed and psql is not on PATH"
    )


# --- sessions ---------------------------------------------------------------

DEFAULT_STATEMENT_TIMEOUT_MS = 300_000  # 5 minutes per query execution


@dataclass(frozen=True)
class ConfigMismatch:
    name: str
    expected: str
    actual: str

    def __str__(self) -> str:
        return f"{self.name}: expected {self.expected!r}, live {self.actual!r}"


@dataclass
class SessionHandle:
    """One connection with its applied settings; never share across threads."""

    driver: Driver
    profile: ConfigProfile
    applied: dict[str, str] = field(default_factory=dict)
    statement_timeout_ms: int = DEFAULT_STATEMENT_TIMEOUT_MS

    def execute(self, sql: str) -> list[tuple]:
        return self.driver.execute(sql)

    def show(self, name: str) -> str:
        rows = self.driver.execute(f"SHOW {name}")
        if not rows or not rows[0]:
            raise QueryFailed(f"SHOW {name} returned nothing")
        return str(rows[0][0])

    def set_param(self, name: str, value: str) -> None:
        self.driver.execute(f"SET {name} = '{value}'")
        self.applied[name] = value

    @contextmanager
    def temporary_settings(self, settings: Sequence[tuple[str, str]]) -> Iterator[None]:
        """Apply settings for the duration of the block, then restore the
        previous live values (verified restorable via SHOW)."""
        saved = [(name, self.show(name)) for name, _ in settings]
        for name, value in settings:
            self.set_param(name, value)
        try:
            yield
        finally:
            for name, old in saved:
                self.set_param(name, old)

    def close(self) -> None:
        self.driver.close()

    def __enter__(self) -> "SessionHandle":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def connect(
    dsn: str,
    profile: ConfigProfile,
    driver: Driver | None = None,
    statement_timeout_ms: int = DEFAULT_STATEMENT_TIMEOUT_MS,
    allow_mismatch: bool = False,
) -> SessionHandle:
    """Open a session, apply session-scope profile params, verify everything.

    Server-scope parameters are only checked; a mismatch raises unless
    ``allow_mismatch`` explicitly overrides.
    """
    session = SessionHandle(
        driver=driver if driver is not None else driver_for_dsn(dsn),
        profile=profile,
        statement_timeout_ms=statement_timeout_ms,
    )
    try:
        apply_profile(session, profile)
        session.set_param("statement_timeout", str(statement_timeout_ms))
        mismatches = verify_config(session, profile)
    except Exception:
        session.close()
        raise
    if mismatches and not allow_mismatch:
        session.close()
        raise ConfigMismatchError(mismatches)
    return session


def apply_profile(session: SessionHandle, profile: ConfigProfile) -> None:
    """(Re-)apply the session-scope parameters; idempotent by construction."""
    for param in profile.session_params():
        session.set_param(param.name, param.expected)


def verify_config(session: SessionHandle, profile: ConfigProfile) -> list[ConfigMismatch]:
    """Compare every profile parameter against the live value, unit-aware."""
    mismatches = []
    for param in profile.params:
        live = session.show(param.name)
        if normalize_value(param.name, live) != normalize_value(param.name, param.expected):
            mismatches.append(ConfigMismatch(name=param.name, expected=param.expected, actual=live))
    return mismatches


def config_snapshot(session: SessionHandle, profile: ConfigProfile) -> dict[str, str]:
    """Live values of every profile parameter, for embedding into reports."""
    return {param.name: session.show(param.name) for param in profile.params}


def refresh_statistics(session: SessionHandle, tables: Sequence[str] | None = None) -> float:
    """Run the statistics refresh; returns elapsed wall-clock milliseconds."""
    started = time.perf_counter()
    if tables:
        for table in tables:
            session.execute(f"ANALYZE {table}")
    else:
        session.execute("ANALYZE")
    return (time.perf_counter() - started) * 1000.0


def set_geqo(session: SessionHandle, native_execution: bool, profile: ConfigProfile) -> bool:
    """Apply the genetic-optimizer policy; returns the applied on/off state."""
    if profile.geqo_policy == "always_on":
        state = True
    elif profile.geqo_policy == "always_off":
        state = False
    else:  # on_for_native_only: the engine gets its full toolkit only when it plans freely
        state = native_execution
    session.set_param("geqo", "on" if state else "off")
    return state

"""Uniform optimizer interface: every optimizer supplies a plan directive.

Three kinds:

* ``native`` — the engine plans freely; the directive is empty and inference
  time is exactly zero.
* ``file_hints`` — precomputed hint comments read from
  ``<family><variant>.hints`` files in a directory.
* ``external_process`` — a long-lived child process speaking line-delimited
  JSON on stdin/stdout. Handshake: the harness sends ``{"hello": 1}``, the
  adapter replies ``{"ready": 1, "name": "<name>"}``. Requests are
  ``{"id": n, "query_id": "<family><variant>", "sql": "..."}``; responses
  must echo the id and carry ``hints``, ``settings`` (list of [param, value]
  pairs) and ``meta``.

Inference time is measured by the harness as wall-clock around the exchange;
self-reported figures may ride along in ``meta`` but are never used.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import hintlang
from .errors import QobenchError
from .workload import Query

KINDS = ("native", "file_hints", "external_process")

DEFAULT_ADAPTER_TIMEOUT_MS = 900_000.0  # 15 minutes; slow inference is a result, not a bug

# Directives may only touch planner behavior, never resources.
SETTINGS_ALLOW_LIST = frozenset({"geqo", "geqo_threshold", "join_collapse_limit"})


def _setting_allowed(name: str) -> bool:
    return name in SETTINGS_ALLOW_LIST or name.startswith("enable_")


class AdapterError(QobenchError):
    pass


class MissingHintFile(AdapterError):
    pass


class AdapterCrashed(AdapterError):
    pass


class ProtocolViolation(AdapterError):
    pass


class AdapterTimeout(AdapterError):
    pass


@dataclass(frozen=True)
class PlanDirective:
    """What an optimizer wants for one query: a hint comment and/or session
    toggles, applied for that query only."""

    hint_text: str = ""
    session_settings: tuple[tuple[str, str], ...] = ()
    meta: str = ""


@dataclass(frozen=True)
class AdapterDescriptor:
    name: str
    kind: str
    location: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "native" and not self.location:
            raise ValueError(f"{self.kind} adapter needs a location")


def validate_directive(directive: PlanDirective) -> list[str]:
    """Violations list; empty means the directive is safe to apply."""
    report: list[str] = []
    if directive.hint_text:
        try:
            hintlang.parse_hints(directive.hint_text)
        except hintlang.HintSyntaxError as exc:
            report.append(f"hint: {exc}")
        except hintlang.HintError as exc:
            report.append(f"hint: {exc}")
    for name, _value in directive.session_settings:
        if not _setting_allowed(name):
            report.append(f"setting {name!r} is not on the allow-list")
    return report


class NativeAdapter:
    """The engine plans for itself; nothing to ask, nothing to wait for."""

    def __init__(self, descriptor: AdapterDescriptor) -> None:
        self.descriptor = descriptor

    def plan(self, query: Query) -> tuple[PlanDirective, float]:
        return PlanDirective(), 0.0

    def close(self) -> None:
        pass


class FileHintsAdapter:
    """Precomputed hints: one ``<family><variant>.hints`` file per query.

    The file contents are passed through verbatim (stripped); inference cost
    was paid offline, so measured inference is zero.
    """

    def __init__(self, descriptor: AdapterDescriptor) -> None:
        self.descriptor = descriptor
        self.directory = Path(descriptor.location)

    def plan(self, query: Query) -> tuple[PlanDirective, float]:
        path = self.directory / f"{query.id.compact}.hints"
        if not path.is_file():
            raise MissingHintFile(f"no hint file {path}")
        return PlanDirective(hint_text=path.read_text(encoding="utf-8").strip()), 0.0

    def close(self) -> None:
        pass


class ExternalProcessAdapter:
    """Child-process optimizer behind the line-delimited JSON protocol."""

    def __init__(
        self,
        descriptor: AdapterDescriptor,
        timeout_ms: float = DEFAULT_ADAPTER_TIMEOUT_MS,
    ) -> None:
        self.descriptor = descriptor
        self.timeout_ms = timeout_ms
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                shlex.split(descriptor.location),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise AdapterCrashed(f"could not start {descriptor.location!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self.remote_name = self._handshake()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _send(self, doc: dict) -> None:
        if self._proc.poll() is not None:
            raise AdapterCrashed(f"adapter {self.descriptor.name} exited with {self._proc.returncode}")
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(doc) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterCrashed(f"adapter {self.descriptor.name} closed its input") from exc

    def _recv(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout_ms / 1000.0)
        except queue.Empty:
            raise AdapterTimeout(
                f"adapter {self.descriptor.name}: no response within {self.timeout_ms:.0f} ms"
            ) from None
        if line is None:
            raise AdapterCrashed(f"adapter {self.descriptor.name} closed its output")
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(f"not a JSON line: {line!r}") from exc
        if not isinstance(doc, dict):
            raise ProtocolViolation(f"expected a JSON object, got: {line!r}")
        return doc

    def _handshake(self) -> str:
        self._send({"hello": 1})
        reply = self._recv()
        if reply.get("ready") != 1 or not isinstance(reply.get("name"), str):
            raise ProtocolViolation(f"bad handshake reply: {reply!r}")
        return reply["name"]

    def plan(self, query: Query) -> tuple[PlanDirective, float]:
        self._next_id += 1
        request_id = self._next_id
        started = time.perf_counter()
        self._send({"id": request_id, "query_id": query.id.compact, "sql": query.sql_text})
        reply = self._recv()
        inference_ms = (time.perf_counter() - started) * 1000.0
        if reply.get("id") != request_id:
            raise ProtocolViolation(f"response id {reply.get('id')!r} != request id {request_id}")
        hints = reply.get("hints", "")
        settings = reply.get("settings", [])
        if not isinstance(hints, str) or not isinstance(settings, list):
            raise ProtocolViolation(f"malformed response fields: {reply!r}")
        try:
            pairs = tuple((str(name), str(value)) for name, value in settings)
        except (TypeError, ValueError) as exc:
            raise ProtocolViolation(f"settings must be [param, value] pairs: {settings!r}") from exc
        directive = PlanDirective(
            hint_text=hints, session_settings=pairs, meta=str(reply.get("meta", ""))
        )
        return directive, inference_ms

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()


AdapterClient = NativeAdapter | FileHintsAdapter | ExternalProcessAdapter


def make_adapter(
    descriptor: AdapterDescriptor, timeout_ms: float = DEFAULT_ADAPTER_TIMEOUT_MS
) -> AdapterClient:
    if descriptor.kind == "native":
        return NativeAdapter(descriptor)
    if descriptor.kind == "file_hints":
        return FileHintsAdapter(descriptor)
    return ExternalProcessAdapter(descriptor, timeout_ms=timeout_ms)


def plan(
    adapter: AdapterDescriptor | AdapterClient, query: Query
) -> tuple[PlanDirective, float]:
    """One-shot convenience: plan a single query through any adapter kind.

    For repeated planning hold on to ``make_adapter(...)`` yourself, so an
    external process is spawned only once.
    """
    if isinstance(adapter, AdapterDescriptor):
        client = make_adapter(adapter)
        try:
            return client.plan(query)
        finally:
            client.close()
    return adapter.plan(query)


def parse_adapter_spec(spec: str) -> AdapterDescriptor:
    """CLI shorthand: ``native``, ``file_hints:<name>:<dir>`` or
    ``external:<name>:<command line>``."""
    if spec == "native":
        return AdapterDescriptor(name="native", kind="native")
    kind, _, rest = spec.partition(":")
    name, _, location = rest.partition(":")
    if kind == "file_hints" and name and location:
        return AdapterDescriptor(name=name, kind="file_hints", location=location)
    if kind in ("external", "external_process") and name and location:
        return AdapterDescriptor(name=name, kind="external_process", location=location)
    raise ValueError(
        f"bad adapter spec {spec!r}; use native, file_hints:<name>:<dir> "
        f"or external:<name>:<command>"
    )

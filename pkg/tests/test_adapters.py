from __future__ import annotations

import sys
from pathlib import Path

import pytest

from qobench.adapters import (
    AdapterCrashed,
    AdapterDescriptor,
    AdapterTimeout,
    ExternalProcessAdapter,
    FileHintsAdapter,
    MissingHintFile,
    NativeAdapter,
    PlanDirective,
    ProtocolViolation,
    make_adapter,
    parse_adapter_spec,
    plan,
    validate_directive,
)
from qobench.workload import Query, QueryId

TOY = Path(__file__).parent / "data" / "toy_adapter.py"
QUERY = Query(QueryId("1", "a"), "SELECT count(*) FROM title t, movie_info mi", "1a.sql")


def toy_descriptor(mode: str = "echo") -> AdapterDescriptor:
    return AdapterDescriptor(
        name=f"toy-{mode}", kind="external_process", location=f"{sys.executable} {TOY} {mode}"
    )


class TestNative:
    def test_empty_directive_zero_inference(self):
        directive, inference_ms = plan(AdapterDescriptor(name="native", kind="native"), QUERY)
        assert directive == PlanDirective()
        assert inference_ms == 0.0


class TestFileHints:
    def test_passthrough(self, tmp_path):
        hint = "/*+ Leading((a b)) HashJoin(a b) SeqScan(a) SeqScan(b) */"
        (tmp_path / "1a.hints").write_text(hint + "\n", encoding="utf-8")
        descriptor = AdapterDescriptor(name="files", kind="file_hints", location=str(tmp_path))
        directive, inference_ms = plan(descriptor, QUERY)
        assert directive.hint_text == hint
        assert inference_ms == 0.0

    def test_missing_file(self, tmp_path):
        descriptor = AdapterDescriptor(name="files", kind="file_hints", location=str(tmp_path))
        with pytest.raises(MissingHintFile):
            plan(descriptor, QUERY)

    def test_location_required(self):
        with pytest.raises(ValueError):
            AdapterDescriptor(name="files", kind="file_hints")


class TestExternalProcess:
    def test_handshake_and_response(self):
        client = make_adapter(toy_descriptor())
        try:
            assert client.remote_name == "toy-echo"
            directive, inference_ms = client.plan(QUERY)
            assert directive.hint_text.startswith("/*+ Leading")
            assert directive.meta == "echo of 1a"
            assert inference_ms > 0.0
        finally:
            client.close()

    def test_ids_match_across_requests(self):
        client = make_adapter(toy_descriptor())
        try:
            for _ in range(5):
                directive, _ = client.plan(QUERY)
                assert directive.hint_text
        finally:
            client.close()

    def test_deterministic_directives(self):
        client = make_adapter(toy_descriptor())
        try:
            first, _ = client.plan(QUERY)
            second, _ = client.plan(QUERY)
            assert first == second
        finally:
            client.close()

    def test_settings_response(self):
        client = make_adapter(toy_descriptor("settings"))
        try:
            directive, _ = client.plan(QUERY)
            assert directive.session_settings == (("enable_nestloop", "off"), ("geqo", "off"))
        finally:
            client.close()

    def test_garbage_response(self):
        client = make_adapter(toy_descriptor("garbage"))
        try:
            with pytest.raises(ProtocolViolation):
                client.plan(QUERY)
        finally:
            client.close()

    def test_wrong_id_response(self):
        client = make_adapter(toy_descriptor("wrong-id"))
        try:
            with pytest.raises(ProtocolViolation):
                client.plan(QUERY)
        finally:
            client.close()

    def test_timeout(self):
        client = ExternalProcessAdapter(toy_descriptor("slow"), timeout_ms=200)
        try:
            with pytest.raises(AdapterTimeout):
                client.plan(QUERY)
        finally:
            client.close()

    def test_crash_detected(self):
        client = make_adapter(toy_descriptor("die"))
        try:
            with pytest.raises(AdapterCrashed):
                client.plan(QUERY)
        finally:
            client.close()

    def test_unstartable_command(self):
        descriptor = AdapterDescriptor(
            name="nope", kind="external_process", location="/no/such/binary"
        )
        with pytest.raises(AdapterCrashed):
            make_adapter(descriptor)


class TestValidateDirective:
    def test_empty_is_valid(self):
        assert validate_directive(PlanDirective()) == []

    def test_allow_listed_settings(self):
        directive = PlanDirective(
            session_settings=(("enable_nestloop", "off"), ("geqo", "off"), ("join_collapse_limit", "1"))
        )
        assert validate_directive(directive) == []

    def test_resource_setting_rejected(self):
        directive = PlanDirective(session_settings=(("work_mem", "64GB"),))
        report = validate_directive(directive)
        assert len(report) == 1 and "work_mem" in report[0]

    def test_unparseable_hint_reported_with_position(self):
        directive = PlanDirective(hint_text="/*+ Leading((a b) */")
        report = validate_directive(directive)
        assert len(report) == 1
        assert "position" in report[0]

    def test_valid_hint_passes(self):
        directive = PlanDirective(
            hint_text="/*+ Leading((a b)) HashJoin(a b) SeqScan(a) SeqScan(b) */"
        )
        assert validate_directive(directive) == []


class TestAdapterSpecParsing:
    def test_native(self):
        assert parse_adapter_spec("native").kind == "native"

    def test_file_hints(self):
        descriptor = parse_adapter_spec("file_hints:mine:/tmp/hints")
        assert descriptor == AdapterDescriptor(name="mine", kind="file_hints", location="/tmp/hints")

    def test_external(self):
        descriptor = parse_adapter_spec("external:greedy:node adapter.js --catalog c.json")
        assert descriptor.kind == "external_process"
        assert descriptor.location == "node adapter.js --catalog c.json"

    @pytest.mark.parametrize("bad", ["", "file_hints:", "external:name", "whatever:x:y"])
    def test_bad_specs(self, bad):
        with pytest.raises(ValueError):
            parse_adapter_spec(bad)


def test_native_adapter_direct():
    adapter = NativeAdapter(AdapterDescriptor(name="native", kind="native"))
    directive, ms = adapter.plan(QUERY)
    assert directive.hint_text == "" and ms == 0.0


def test_file_hints_adapter_reads_compact_id(tmp_path):
    (tmp_path / "1a.hints").write_text("", encoding="utf-8")
    adapter = FileHintsAdapter(
        AdapterDescriptor(name="f", kind="file_hints", location=str(tmp_path))
    )
    directive, _ = adapter.plan(QUERY)
    assert directive.hint_text == ""

from __future__ import annotations

import pytest

from qobench.dbms import (
    ConfigMismatchError,
    ConfigParam,
    ConfigProfile,
    QueryFailed,
    UnknownParameter,
    apply_profile,
    config_snapshot,
    connect,
    default_profile,
    normalize_value,
    parameter_scope,
    refresh_statistics,
    set_geqo,
    verify_config,
)
from qobench.fakedb import FRAMEWORK_SETTINGS, STOCK_SETTINGS, FakeDbms


def framework_session(profile=None, **fake_kwargs):
    profile = profile if profile is not None else default_profile()
    fake = FakeDbms(server_settings=FRAMEWORK_SETTINGS, **fake_kwargs)
    return connect("fake:", profile, driver=fake)


class TestNormalization:
    def test_memory_units_equal(self):
        forms = ["4GB", "4096MB", "4194304kB"]
        normalized = {normalize_value("work_mem", v) for v in forms}
        assert len(normalized) == 1

    def test_bare_number_uses_parameter_base_unit(self):
        # work_mem counts kilobytes when no unit is given
        assert normalize_value("work_mem", "4194304") == normalize_value("work_mem", "4GB")
        # shared_buffers counts 8kB pages
        assert normalize_value("shared_buffers", "4194304") == normalize_value(
            "shared_buffers", "32GB"
        )

    def test_time_units(self):
        assert normalize_value("statement_timeout", "5min") == normalize_value(
            "statement_timeout", "300000"
        )

    def test_bool_spellings(self):
        assert normalize_value("geqo", "on") == normalize_value("geqo", "true")
        assert normalize_value("geqo", "off") != normalize_value("geqo", "on")

    def test_int(self):
        assert normalize_value("max_worker_processes", "8") == normalize_value(
            "max_worker_processes", " 8 "
        )

    def test_different_sizes_differ(self):
        assert normalize_value("work_mem", "4GB") != normalize_value("work_mem", "4MB")


class TestRegistry:
    def test_scopes(self):
        assert parameter_scope("work_mem") == "session"
        assert parameter_scope("shared_buffers") == "server"
        assert parameter_scope("enable_bitmapscan") == "session"

    def test_unknown_parameter(self):
        with pytest.raises(UnknownParameter):
            parameter_scope("made_up_parameter")

    def test_explicit_scope_for_unregistered(self):
        param = ConfigParam("pg_hint_plan.enable_hint", "on", scope="session")
        assert param.scope == "session"


class TestProfile:
    def test_default_profile_values(self):
        profile = default_profile()
        expected = {
            "work_mem": "4GB",
            "shared_buffers": "32GB",
            "temp_buffers": "32GB",
            "effective_cache_size": "32GB",
            "max_worker_processes": "8",
            "geqo": "off",
            "autovacuum": "off",
        }
        assert {p.name: p.expected for p in profile.params} == expected
        assert profile.geqo_policy == "on_for_native_only"

    def test_duplicate_params_rejected(self):
        with pytest.raises(ValueError):
            ConfigProfile("x", params=(ConfigParam("geqo", "on"), ConfigParam("geqo", "off")))

    def test_roundtrip_file(self, tmp_path):
        from qobench.dbms import load_profile, save_profile

        profile = default_profile()
        path = tmp_path / "profile.json"
        save_profile(profile, path)
        assert load_profile(path) == profile


class TestConnect:
    def test_mismatch_on_stock_server(self):
        with pytest.raises(ConfigMismatchError) as err:
            connect("fake:", default_profile(), driver=FakeDbms())
        names = {m.name for m in err.value.mismatches}
        assert "shared_buffers" in names  # 128MB live vs 32GB expected

    def test_tuned_server_passes(self):
        session = framework_session()
        assert verify_config(session, default_profile()) == []

    def test_session_params_applied(self):
        session = framework_session()
        assert session.show("work_mem") == "4GB"

    def test_empty_profile_applies_nothing(self):
        session = connect("fake:", ConfigProfile("empty"), driver=FakeDbms())
        assert set(session.applied) == {"statement_timeout"}

    def test_allow_mismatch_override(self):
        session = connect("fake:", default_profile(), driver=FakeDbms(), allow_mismatch=True)
        assert any(m.name == "shared_buffers" for m in verify_config(session, default_profile()))


class TestVerifyConfig:
    def test_single_mismatch_entry(self):
        profile = ConfigProfile("x", params=(ConfigParam("max_worker_processes", "8"),))
        fake = FakeDbms()  # stock server reports 2
        session = connect("fake:", profile, driver=fake, allow_mismatch=True)
        mismatches = verify_config(session, profile)
        assert len(mismatches) == 1
        assert mismatches[0].name == "max_worker_processes"
        assert mismatches[0].actual == "2"

    def test_effective_cache_size_mismatch(self):
        profile = ConfigProfile("x", params=(ConfigParam("effective_cache_size", "32GB"),))
        fake = FakeDbms(server_settings={**STOCK_SETTINGS, "effective_cache_size": "4GB"})
        # session-scope param gets applied at connect, so probe the server first
        session = connect("fake:", ConfigProfile("empty"), driver=fake)
        assert [m.name for m in verify_config(session, profile)] == ["effective_cache_size"]

    def test_idempotent_reapply(self):
        profile = default_profile()
        session = framework_session(profile)
        before = config_snapshot(session, profile)
        apply_profile(session, profile)
        assert config_snapshot(session, profile) == before
        assert verify_config(session, profile) == []


class TestRefreshStatistics:
    def test_all_tables(self):
        session = framework_session()
        assert refresh_statistics(session) > 0.0

    def test_listed_tables(self):
        session = framework_session()
        assert refresh_statistics(session, ["title", "movie_info"]) > 0.0

    def test_unknown_table(self):
        session = framework_session()
        with pytest.raises(QueryFailed):
            refresh_statistics(session, ["no_such_table"])


class TestGeqoPolicy:
    def test_native_only_native_run(self):
        session = framework_session()
        assert set_geqo(session, native_execution=True, profile=default_profile()) is True
        assert session.show("geqo") == "on"

    def test_native_only_hinted_run(self):
        session = framework_session()
        assert set_geqo(session, native_execution=False, profile=default_profile()) is False
        assert session.show("geqo") == "off"

    def test_always_off(self):
        profile = ConfigProfile("x", geqo_policy="always_off")
        session = framework_session(profile)
        assert set_geqo(session, native_execution=True, profile=profile) is False

    def test_always_on(self):
        profile = ConfigProfile("x", geqo_policy="always_on")
        session = framework_session(profile)
        assert set_geqo(session, native_execution=False, profile=profile) is True


class TestTemporarySettings:
    def test_restores_previous_values(self):
        session = framework_session()
        session.set_param("enable_bitmapscan", "on")
        with session.temporary_settings([("enable_bitmapscan", "off")]):
            assert session.show("enable_bitmapscan") == "off"
        assert session.show("enable_bitmapscan") == "on"

    def test_restores_on_error(self):
        session = framework_session()
        with pytest.raises(RuntimeError):
            with session.temporary_settings([("geqo", "on")]):
                raise RuntimeError("boom")
        assert session.show("geqo") == "off"


def test_server_scope_param_cannot_be_set():
    fake = FakeDbms()
    with pytest.raises(QueryFailed):
        fake.execute("SET shared_buffers = '32GB'")

"""Command-line front end: qobench split|run|ablate|enumerate|covariate-script|verify-config|report.

The connection descriptor comes from ``--dsn`` or the QOBENCH_DSN environment
variable; the scripted in-memory DBMS answers ``fake:`` / ``fake:framework``
descriptors, which keeps every subcommand runnable without a server.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, adapters, dbms, hintlang, planspace, report, runner, splitter, workload
from .errors import QobenchError
from .measurement import TimingPolicy

DSN_ENVVAR = "QOBENCH_DSN"


@click.group()
@click.version_option(version=__version__, prog_name="qobench")
def main() -> None:
    """Reproducible benchmarking harness for query optimizers."""


def _load_workload(directory: str, name: str, convention: str) -> workload.Workload:
    return workload.load_workload(directory, name=name, convention=convention)


def _profile(path: str | None) -> dbms.ConfigProfile:
    return dbms.load_profile(path) if path else dbms.default_profile()


@main.command()
@click.option("--workload-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--name", default="workload", show_default=True)
@click.option("--convention", type=click.Choice(workload.CONVENTIONS), default="job", show_default=True)
@click.option("--method", type=click.Choice(splitter.METHODS), required=True)
@click.option("--ratio", type=float, default=splitter.DEFAULT_RATIO, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def split(workload_dir: str, name: str, convention: str, method: str, ratio: float, seed: int, out: str) -> None:
    """Sample a seeded train/test split and persist it."""
    wl = _load_workload(workload_dir, name, convention)
    spec = splitter.sample_split(wl, splitter.SplitMethod(method, ratio), seed)
    splitter.save_split(spec, out)
    click.echo(f"{spec.label}: {len(spec.train)} train / {len(spec.test)} test -> {out}")


@main.command()
@click.option("--profile", "profile_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--dsn", envvar=DSN_ENVVAR, default="fake:framework", show_default=True)
def verify_config(profile_path: str | None, dsn: str) -> None:
    """Check the live configuration against a profile; exit 1 on mismatch."""
    profile = _profile(profile_path)
    session = dbms.connect(dsn, profile, allow_mismatch=True)
    try:
        mismatches = dbms.verify_config(session, profile)
    finally:
        session.close()
    if not mismatches:
        click.echo(f"profile {profile.name!r}: all {len(profile.params)} parameters match")
        return
    for m in mismatches:
        click.echo(str(m))
    sys.exit(1)


@main.command()
@click.option("--workload-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--name", default="workload", show_default=True)
@click.option("--convention", type=click.Choice(workload.CONVENTIONS), default="job", show_default=True)
@click.option("--split", "split_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--adapter", "adapter_specs", multiple=True, default=("native",), show_default=True,
              help="native, file_hints:<name>:<dir>, or external:<name>:<command>")
@click.option("--profile", "profile_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--pick", type=click.Choice(("kth", "mean", "geomean")), default="kth", show_default=True)
@click.option("--timeout-ms", type=float, default=300_000.0, show_default=True)
@click.option("--dsn", envvar=DSN_ENVVAR, default="fake:framework", show_default=True)
@click.option("--allow-mismatch", is_flag=True, help="Run even if the live config deviates from the profile.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def run(workload_dir: str, name: str, convention: str, split_path: str, adapter_specs: tuple[str, ...],
        profile_path: str | None, k: int, pick: str, timeout_ms: float, dsn: str,
        allow_mismatch: bool, out_dir: str) -> None:
    """Measure the full workload once per adapter under a shared split."""
    wl = _load_workload(workload_dir, name, convention)
    spec = splitter.load_split(split_path)
    descriptors = [adapters.parse_adapter_spec(s) for s in adapter_specs]
    policy = TimingPolicy(k=k, pick=pick, timeout_ms=timeout_ms)
    reports = runner.run_benchmark(
        wl, spec, descriptors, _profile(profile_path), policy, dsn=dsn, allow_mismatch=allow_mismatch
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        path = out / f"run_{rep.adapter}.json"
        runner.save_run_report(rep, path)
        errors = sum(1 for r in rep.records if r.timing.error)
        timeouts = sum(1 for r in rep.records if r.timing.timed_out)
        click.echo(f"{rep.adapter}: {len(rep.records)} records "
                   f"({timeouts} timeouts, {errors} errors) -> {path}")


@main.command()
@click.option("--workload-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--name", default="workload", show_default=True)
@click.option("--convention", type=click.Choice(workload.CONVENTIONS), default="job", show_default=True)
@click.option("--toggle", type=click.Choice(tuple(runner.TOGGLES)), required=True)
@click.option("--profile", "profile_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold-ms", type=float, default=runner.DEFAULT_DELTA_THRESHOLD_MS, show_default=True)
@click.option("--repeats-per-arm", type=int, default=runner.DEFAULT_REPEATS_PER_ARM, show_default=True)
@click.option("--timeout-ms", type=float, default=300_000.0, show_default=True)
@click.option("--dsn", envvar=DSN_ENVVAR, default="fake:framework", show_default=True)
@click.option("--allow-mismatch", is_flag=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def ablate(workload_dir: str, name: str, convention: str, toggle: str, profile_path: str | None,
           threshold_ms: float, repeats_per_arm: int, timeout_ms: float, dsn: str,
           allow_mismatch: bool, out: str) -> None:
    """Two-arm ablation of a planner toggle across the workload."""
    wl = _load_workload(workload_dir, name, convention)
    rep = runner.run_ablation(
        wl, toggle, _profile(profile_path), TimingPolicy(timeout_ms=timeout_ms),
        delta_threshold_ms=threshold_ms, repeats_per_arm=repeats_per_arm,
        dsn=dsn, allow_mismatch=allow_mismatch,
    )
    doc = {
        "toggle": rep.toggle,
        "settings_diff": [list(d) for d in rep.settings_diff],
        "delta_threshold_ms": rep.delta_threshold_ms,
        "repeats_per_arm": rep.repeats_per_arm,
        "entries": [
            {
                "query_id": e.query_id.text,
                "delta_ms": round(e.delta_ms, 3),
                "exceeds_threshold": e.exceeds_threshold,
                "p_value": round(e.p_value, 6),
                "significant": e.significant,
                "factor": round(e.factor, 3),
                "direction": e.direction,
            }
            for e in rep.entries
        ],
    }
    Path(out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    click.echo(f"{toggle}: {len(rep.flagged())} exceed {threshold_ms:g} ms, "
               f"{len(rep.significant_entries())} significant -> {out}")


@main.command()
@click.option("--aliases", required=True, help="Comma-separated relation aliases.")
@click.option("--join-methods", default="NestLoop,HashJoin,MergeJoin", show_default=True)
@click.option("--scan-methods", default="SeqScan,IndexScan,IndexOnlyScan,BitmapScan,TidScan", show_default=True)
@click.option("--shape", "shapes", multiple=True,
              type=click.Choice([s.value for s in hintlang.TreeShape]))
@click.option("--edge", "edges", multiple=True, help="Join-graph edge alias1-alias2; repeatable.")
@click.option("--all-combinations", is_flag=True, help="Keep cross-join trees (no connectivity filter).")
@click.option("--logical", is_flag=True, help="Emit join orders only, no method assignment.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def enumerate(aliases: str, join_methods: str, scan_methods: str, shapes: tuple[str, ...],
              edges: tuple[str, ...], all_combinations: bool, logical: bool, out_dir: str) -> None:
    """Exhaustively enumerate plans: one hint per line plus a count manifest."""
    join_by_name = {m.value: m for m in hintlang.JoinMethod}
    scan_by_name = {m.value: m for m in hintlang.ScanMethod}
    spec = planspace.EnumSpec(
        aliases=tuple(a.strip() for a in aliases.split(",")),
        join_methods=tuple(join_by_name[n.strip()] for n in join_methods.split(",")),
        scan_methods=tuple(scan_by_name[n.strip()] for n in scan_methods.split(",")),
        shape_filter=frozenset(hintlang.TreeShape(s) for s in shapes) or None,
        join_graph=planspace.join_graph(tuple(e.split("-", 1)) for e in edges) if edges else None,
        enforce_connectivity=not all_combinations,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_shape: dict[str, int] = {}
    total = 0
    stream = (
        planspace.enumerate_join_trees(spec) if logical else planspace.enumerate_physical(spec)
    )
    with (out / "plans.hints").open("w", encoding="utf-8") as sink:
        for tree in stream:
            if logical:
                sink.write(f"Leading({hintlang.leading_clause(tree)})\n")
            else:
                sink.write(hintlang.render_hints(tree) + "\n")
            total += 1
            if not isinstance(tree, hintlang.Leaf):
                shape = hintlang.classify_shape(tree).value
                by_shape[shape] = by_shape.get(shape, 0) + 1
    manifest = {
        "aliases": list(spec.aliases),
        "join_methods": [m.value for m in spec.join_methods],
        "scan_methods": [m.value for m in spec.scan_methods],
        "scan_mode": "varied per leaf",
        "shape_filter": sorted(s.value for s in spec.shape_filter) if spec.shape_filter else None,
        "join_graph": sorted(sorted(e) for e in spec.join_graph) if spec.join_graph else None,
        "connectivity_filter": spec.enforce_connectivity and spec.join_graph is not None,
        "logical_only": logical,
        "total": total,
        "by_shape": dict(sorted(by_shape.items())),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    click.echo(f"{total} plans -> {out / 'plans.hints'} (manifest: {out / 'manifest.json'})")


@main.command("covariate-script")
@click.option("--table", required=True)
@click.option("--key-column", required=True)
@click.option("--keep-fraction", type=float, required=True)
@click.option("--seed", type=float, required=True)
@click.option("--dependent", "dependents", multiple=True,
              help="dep_table:fk_column for schemas without cascading deletes; repeatable.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write to a file instead of stdout.")
def covariate_script(table: str, key_column: str, keep_fraction: float, seed: float,
                     dependents: tuple[str, ...], out: str | None) -> None:
    """Emit the seeded row-removal script simulating database drift."""
    deps = []
    for spec in dependents:
        dep_table, _, fk = spec.partition(":")
        if not dep_table or not fk:
            raise click.BadParameter(f"--dependent must be dep_table:fk_column, got {spec!r}")
        deps.append((dep_table, fk))
    script = runner.gen_covariate_script(table, key_column, keep_fraction, seed, dependents=deps)
    if out:
        Path(out).write_text(script, encoding="utf-8")
        click.echo(f"covariate script -> {out}")
    else:
        click.echo(script, nl=False)


@main.command("report")
@click.option("--run", "run_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False), help="Run report JSON; repeatable.")
@click.option("--subset", type=click.Choice(report.SUBSETS), default="test", show_default=True)
@click.option("--baseline", default=None, help="Adapter name to compare against.")
@click.option("--format", "fmt", type=click.Choice(("csv", "structured-text")), default="csv", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def report_cmd(run_paths: tuple[str, ...], subset: str, baseline: str | None, fmt: str, out: str) -> None:
    """Aggregate saved runs into a comparison table."""
    rows = [report.aggregate(runner.load_run_report(p), subset=subset) for p in run_paths]
    table: object = rows
    if baseline is not None:
        table = report.compare(rows, baseline)
    report.emit(table, fmt, out)
    click.echo(f"{len(rows)} runs aggregated ({subset}) -> {out}")


if __name__ == "__main__":
    main()

"""Operator entrypoint: ingestion, context builds, questions, eval, serving."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .config import ConfigError, load_config_file, make_embedder, make_gateway, pipeline_config
from .errors import AutoEdaError
from .evalx import evaluate
from .pipeline import Workspace


def _workspace(ctx) -> Workspace:
    raw = ctx.obj["raw_config"]
    return Workspace(
        ctx.obj["data_dir"],
        config=pipeline_config(raw),
        embedder=make_embedder(raw),
    )


def _gateway_factory(ctx, provider: str):
    raw = ctx.obj["raw_config"]
    return lambda: make_gateway(provider, raw)


@click.group()
@click.option("--data-dir", default=".autoeda", show_default=True, help="Workspace directory.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True), help="YAML/JSON config file.")
@click.pass_context
def main(ctx, data_dir, config_path):
    """LLM-assisted exploratory data analysis pipeline."""
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = data_dir
    try:
        ctx.obj["raw_config"] = load_config_file(config_path)
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot load config: {exc}")


@main.command()
@click.option("--url", default=None, help="Connection URL (sqlite:///..., mysql://...).")
@click.option("--fixtures", default=None, type=click.Path(exists=True), help="Directory of .sql fixture files.")
@click.option("--name", default=None)
@click.pass_context
def ingest(ctx, url, fixtures, name):
    """Register a datasource and store its schema snapshot."""
    if bool(url) == bool(fixtures):
        raise click.ClickException("pass exactly one of --url or --fixtures")
    target = url or str(Path(fixtures).resolve())
    try:
        workspace = _workspace(ctx)
        ds = workspace.ingest(target, name=name)
        snapshot = ds.load_snapshot()
    except (AutoEdaError, ConfigError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"datasource {ds.id} registered ({len(snapshot.tables)} tables)")
    click.echo(ds.id)


@main.command("build-hdc")
@click.argument("datasource_id")
@click.option("--provider", required=True, help="scripted:<rules.json> or http:<profile>.")
@click.option("--parallelism", default=1, show_default=True, type=int)
@click.pass_context
def build_hdc(ctx, datasource_id, provider, parallelism):
    """Build the hierarchical data context for a datasource (synchronous)."""
    try:
        workspace = _workspace(ctx)
        ds = workspace.datasource(datasource_id)
        gateway = _gateway_factory(ctx, provider)()
        report = workspace.build_hdc(ds, gateway, parallelism=parallelism)
    except (AutoEdaError, ConfigError) as exc:
        raise click.ClickException(str(exc))
    click.echo("stage timings (s):")
    for stage, seconds in report["stages"].items():
        click.echo(f"  {stage:22} {seconds:.3f}")
    click.echo("token usage by tag:")
    for tag, counters in report["tokens_by_tag"].items():
        click.echo(
            f"  {tag:22} calls={counters['calls']} in={counters['input_tokens']} out={counters['output_tokens']}"
        )
    totals = report["totals"]
    click.echo(
        f"totals: calls={totals['calls']} input_tokens={totals['input_tokens']} "
        f"output_tokens={totals['output_tokens']} cost_usd={totals['cost_usd']}"
    )
    if report["tables_skipped"]:
        click.echo(f"skipped tables: {sorted(report['tables_skipped'])}")
    click.echo(f"columns summarized: {report['columns_summarized']}")
    click.echo(f"report: {ds.report_path}")


def _chart_text(chart: dict | None) -> str:
    if chart is None:
        return "no chart (not executed)"
    bindings = ", ".join(f"{k}={v}" for k, v in chart["bindings"].items())
    return f"{chart['chart_type']}" + (f" ({bindings})" if bindings else "")


@main.command()
@click.argument("datasource_id")
@click.argument("question")
@click.option("--provider", required=True)
@click.option("--json", "as_json", is_flag=True, help="Print the machine-readable bundle.")
@click.option(
    "--dump-prompts",
    "dump_dir",
    default=None,
    type=click.Path(),
    help="Write every constructed SQL-stage prompt to this directory for drift review.",
)
@click.pass_context
def ask(ctx, datasource_id, question, provider, as_json, dump_dir):
    """Run the full question pipeline and print the result bundle."""
    try:
        workspace = _workspace(ctx)
        ds = workspace.datasource(datasource_id)
        gateway = _gateway_factory(ctx, provider)()
        bundle = workspace.ask(ds, gateway, question, prompt_dump_dir=dump_dir)
    except (AutoEdaError, ConfigError) as exc:
        raise click.ClickException(str(exc))

    if as_json:
        click.echo(json.dumps(bundle, sort_keys=True, indent=1))
        return

    clarified = bundle["clarified_task"]
    click.echo(f"question: {bundle['question']}")
    click.echo(f"refined:  {clarified['refined_task']}")
    for ambiguity in clarified["ambiguities"]:
        click.echo(f"  ambiguity {ambiguity['concept']}: {ambiguity['explanation']}")
    plan = bundle["plan"]
    if plan["single_sql_answerable"]:
        click.echo("plan: single SQL")
    else:
        click.echo(f"plan: {len(plan['subtasks'])} subtasks")
        for subtask in plan["subtasks"]:
            click.echo(f"  - {subtask['description']}")
    if not bundle["answerable"]:
        click.echo("outcome: not answerable with the current schema")
    for artifact, chart in zip(bundle["artifacts"], bundle["charts"]):
        click.echo(f"\nsql [{artifact['status']}]: {artifact['sql'] or '(none)'}")
        for entry in artifact["refinement_trace"]:
            click.echo(
                f"  round {entry['round']} ({entry['stage']}): {entry['error_text']}"
                f" -> {entry['replacement_sql']}"
            )
        preview = artifact.get("result_preview")
        if preview:
            click.echo(f"  columns: {', '.join(preview['columns'])}")
            for row in preview["rows"][:5]:
                click.echo(f"  {row}")
        click.echo(f"  chart: {_chart_text(chart)}")


@main.command("eval")
@click.option("--benchmark-dir", required=True, type=click.Path(exists=True))
@click.option("--split", default="dev", show_default=True)
@click.option("--provider", required=True)
@click.option("--limit", default=None, type=int, help="Evaluate only the first N questions.")
@click.option("--max-questions", default=None, type=int, help="Hard cap for live-provider cost control.")
@click.option("--seed", default=None, type=int, help="Shuffle questions deterministically before capping.")
@click.option("--cache", "cache_path", default=None, type=click.Path(), help="Resumable results cache file.")
@click.option("--report", "report_path", default=None, type=click.Path(), help="Where to write the JSON report.")
@click.pass_context
def eval_cmd(ctx, benchmark_dir, split, provider, limit, max_questions, seed, cache_path, report_path):
    """Score execution accuracy over a Spider-layout benchmark directory."""
    try:
        workspace = _workspace(ctx)
        report = evaluate(
            workspace,
            benchmark_dir,
            split,
            _gateway_factory(ctx, provider),
            limit=limit,
            max_questions=max_questions,
            seed=seed,
            cache_path=cache_path,
        )
    except (AutoEdaError, ConfigError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"EX: {report['ex_percent']}% ({report['correct']}/{report['total']})")
    for label, slot in sorted(report["by_difficulty"].items()):
        click.echo(f"  {label:12} {slot['ex_percent']}% ({slot['correct']}/{slot['total']})")
    click.echo(
        f"full-scale reference: {report['full_scale_reference_ex_percent']}% ({report['reference_note']})"
    )
    if report_path:
        Path(report_path).write_text(json.dumps(report, indent=1, sort_keys=True), encoding="utf-8")
        click.echo(f"report written to {report_path}")


@main.command()
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--provider", required=True)
@click.option("--workers", default=2, show_default=True, type=int)
@click.option("--ui-dir", default=None, type=click.Path(), help="Static UI assets to serve at /ui.")
@click.pass_context
def serve(ctx, port, host, provider, workers, ui_dir):
    """Run the HTTP service (polling job API)."""
    import uvicorn

    from .service.app import create_app

    try:
        workspace = _workspace(ctx)
        app = create_app(
            workspace,
            _gateway_factory(ctx, provider),
            workers=workers,
            ui_dir=ui_dir,
        )
    except (AutoEdaError, ConfigError) as exc:
        raise click.ClickException(str(exc))
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except SystemExit as exc:
        raise click.ClickException(f"server exited: {exc}")
    finally:
        app.state.jobs.drain()


def _read_ndjson(path: str):
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records


@main.command("load-terms")
@click.argument("datasource_id")
@click.argument("ndjson_file", type=click.Path(exists=True))
@click.option("--provider", default=None, help="Unused for ingestion; accepted for symmetry.")
@click.pass_context
def load_terms(ctx, datasource_id, ndjson_file, provider):
    """Load domain terms ({"term","definition"} per line) into the term index."""
    try:
        workspace = _workspace(ctx)
        ds = workspace.datasource(datasource_id)
        engine = workspace.question_engine(ds, gateway=None)
        count = engine.ingest_domain_terms(_read_ndjson(ndjson_file))
    except (AutoEdaError, ConfigError, ValueError, KeyError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"loaded {count} domain terms")


@main.command("load-sops")
@click.argument("datasource_id")
@click.argument("ndjson_file", type=click.Path(exists=True))
@click.pass_context
def load_sops(ctx, datasource_id, ndjson_file):
    """Load standard procedures ({"id","domain_tag","steps"} per line)."""
    try:
        workspace = _workspace(ctx)
        ds = workspace.datasource(datasource_id)
        engine = workspace.question_engine(ds, gateway=None)
        count = engine.ingest_sops(_read_ndjson(ndjson_file))
    except (AutoEdaError, ConfigError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"loaded {count} procedures")


if __name__ == "__main__":
    main()

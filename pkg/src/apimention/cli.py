"""Command-line interface.

Exit codes: 0 success, 1 bad input, 2 internal invariant violation.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from apimention.classifier import load_model, save_model, train as train_model
from apimention.corpus import load_corpus, training_examples
from apimention.db import dump_database, load_database
from apimention.errors import ApiMentionError, InputError, InvariantError
from apimention.evaluate import evaluate as evaluate_decisions, load_truth
from apimention.pipeline import PipelineConfig, load_config, resolve_thread
from apimention.render import read_records, render_html, render_records
from apimention.text import load_thread, load_threads


def _config(path: str | None, **overrides) -> PipelineConfig:
    base = load_config(path) if path else PipelineConfig()
    return base.updated(**overrides)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


config_option = click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON pipeline config.")


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Detect and resolve API mentions in developer-forum threads."""


@cli.command()
@click.argument("db_file", type=click.Path())
@click.option("-o", "--output", help="Write the validated, normalized database here.")
def ingest(db_file, output):
    """Validate an API database file."""
    db = load_database(db_file)
    if output:
        dump_database(db, output)
    click.echo(f"{db_file}: {len(db)} APIs, {len(db.graph.edges)} dependency edges")


@cli.command()
@click.argument("corpus", type=click.Path())
@click.option("--db", "db_file", required=True, type=click.Path(), help="API database file.")
@click.option("--threads", "threads_path", required=True, type=click.Path(), help="Thread file or directory.")
@click.option("-o", "--output", required=True, help="Model file to write.")
@config_option
def train(corpus, db_file, threads_path, output, config_path):
    """Train the resolution classifier from a labelled corpus.

    CORPUS lines are labelled (mention, candidate) pairs or span-level truth
    records whose candidates are labelled automatically.
    """
    config = _config(config_path)
    db = load_database(db_file)
    threads = {t.thread_id: t for t in load_threads(threads_path)}
    examples = training_examples(load_corpus(corpus), threads, db, config)
    model = train_model(examples)
    save_model(model, output)
    positives = sum(e.label for e in examples)
    click.echo(f"trained on {len(examples)} pairs ({positives} true, {len(examples) - positives} false) -> {output}")


@cli.command()
@click.argument("target", type=click.Path())
@click.option("--db", "db_file", required=True, type=click.Path())
@click.option("--model", "model_file", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["records", "html"]), default="records", show_default=True)
@click.option("--window", type=int, help="Sentence window around a mention.")
@click.option("--tau", type=float, help="Classifier hit threshold.")
@click.option("--min-token-sort", type=float, help="Smallest token-sort weight kept as a candidate.")
@click.option("--relax-gate/--strict-gate", default=None, help="Extrinsic filters need one resolved neighbor, not two.")
@click.option("-o", "--output", help="Output file (records) or directory (html for several threads).")
@config_option
def resolve(target, db_file, model_file, fmt, window, tau, min_token_sort, relax_gate, output, config_path):
    """Resolve every mention of a thread file or a directory of threads."""
    config = _config(
        config_path, window=window, tau=tau, min_token_sort=min_token_sort, relax_extrinsic_gate=relax_gate
    )
    db = load_database(db_file)
    model = load_model(model_file)
    docs = load_threads(target)
    results = [(doc, resolve_thread(doc, db, model, config)) for doc in docs]
    if fmt == "records":
        _write("".join(render_records(ds) for _, ds in results), output)
        return
    if len(results) == 1 and (output is None or not Path(output).is_dir()):
        _write(render_html(results[0][1], results[0][0], db), output)
        return
    if output is None:
        raise InputError("html output for several threads needs -o DIRECTORY")
    out_dir = Path(output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc, ds in results:
        (out_dir / f"{doc.thread_id}.html").write_text(render_html(ds, doc, db), encoding="utf-8")


@cli.command()
@click.argument("decisions", type=click.Path())
@click.argument("truth", type=click.Path())
@click.option("--overlap", is_flag=True, help="Credit overlapping spans instead of requiring equal spans.")
@click.option("-o", "--output", help="Write metrics as line-delimited records.")
@click.option("--figure", type=click.Path(dir_okay=False), help="Render a score chart (png, svg, pdf).")
def evaluate(decisions, truth, overlap, output, figure):
    """Score decision records against ground truth."""
    report = evaluate_decisions(read_records(decisions), load_truth(truth), overlap)
    if output:
        Path(output).write_text(report.to_jsonl(), encoding="utf-8")
    if figure:
        from apimention.plots import plot_metrics

        plot_metrics(report, figure)
    click.echo(report.table(), nl=False)


@cli.command()
@click.argument("decisions", type=click.Path())
@click.argument("thread", type=click.Path())
@click.option("--db", "db_file", type=click.Path(), help="API database, for tooltip names and descriptions.")
@click.option("-o", "--output", required=True)
def render(decisions, thread, db_file, output):
    """Render decision records over a thread as annotated HTML."""
    doc = load_thread(thread)
    db = load_database(db_file) if db_file else None
    mine = [d for d in read_records(decisions) if d.mention.thread_id == doc.thread_id]
    Path(output).write_text(render_html(mine, doc, db), encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="apimention", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InvariantError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 2
    except (InputError, ApiMentionError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front door: one-shot extraction, tracking, serving,
corpus evaluation.

Exit codes for `extract` mirror the outcome codes: 0 OK, 2 no price,
3 many prices, 4 page unavailable; 64 flags usage errors.
"""

from __future__ import annotations

import json as jsonlib
import os
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import click

from .corpus import build_fixture_corpus
from .engine import ExtractionKit, ExtractionOutcome, FetchResult, OutcomeCode, find_attribute_values
from .errors import NotFoundError, PricewatchError
from .evaluator import evaluate_corpus, format_table, write_report
from .fetch import HttpFetcher
from .fragments import load_clues
from .rules import load_discarding_rules
from .store import PageStore, TrackerService

EXIT_CODES = {
    OutcomeCode.OK: 0,
    OutcomeCode.NO_PRICE: 2,
    OutcomeCode.MANY_PRICES: 3,
    OutcomeCode.PAGE_UNAVAILABLE: 4,
}

USAGE_EXIT = 64


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _status(code: OutcomeCode) -> str:
    text = code.value
    if not _use_color():
        return text
    color = "green" if code is OutcomeCode.OK else "red"
    return click.style(text, fg=color)


def _print_outcome(outcome: ExtractionOutcome, as_json: bool) -> None:
    if as_json:
        click.echo(jsonlib.dumps(outcome.to_dict(), indent=2))
        return
    if outcome.code is OutcomeCode.OK:
        click.echo(str(outcome.value))
    elif outcome.code is OutcomeCode.MANY_PRICES:
        click.echo("several prices found:")
        for v in outcome.candidates:
            click.echo(f"  - {v}")
    elif outcome.code is OutcomeCode.NO_PRICE:
        click.echo("no price found")
    else:
        click.echo("page unavailable")


def _load_config(ruleset_path, clues_path, min_, max_):
    ruleset = load_discarding_rules(ruleset_path)
    clues = load_clues(clues_path)
    if (min_ is None) != (max_ is None):
        raise click.UsageError("--min and --max must be given together")
    if min_ is not None:
        try:
            ruleset = ruleset.with_threshold(Decimal(min_), Decimal(max_))
        except InvalidOperation:
            raise click.UsageError("--min/--max must be decimal amounts")
    return ruleset, clues


@click.group()
def cli():
    """Extract prices from product pages and follow them over time."""


@cli.command()
@click.argument("target")
@click.option("--from-scratch", is_flag=True,
              help="Run the full fragmentation pipeline. One-shot extraction "
                   "has no stored patterns, so this is already the behaviour; "
                   "the flag exists for parity with tracked pages.")
@click.option("--ruleset", type=click.Path(exists=True, dir_okay=False), default=None,
              envvar="PRICEWATCH_RULESET", help="Ruleset file.")
@click.option("--clues", type=click.Path(exists=True, dir_okay=False), default=None,
              envvar="PRICEWATCH_CLUES", help="Clue table file.")
@click.option("--min", "min_", default=None, help="Lower price bound (enables the threshold rule).")
@click.option("--max", "max_", default=None, help="Upper price bound (enables the threshold rule).")
@click.option("--json", "as_json", is_flag=True, help="Emit the outcome as JSON.")
@click.option("--timeout", type=float, default=15.0, envvar="PRICEWATCH_TIMEOUT",
              show_default=True, help="Fetch timeout in seconds.")
def extract(target, from_scratch, ruleset, clues, min_, max_, as_json, timeout):
    """One-shot extraction from a local FILE or a URL (no store involved)."""
    ruleset_obj, clue_list = _load_config(ruleset, clues, min_, max_)
    path = Path(target)
    if path.is_file():
        html = path.read_text(encoding="utf-8", errors="replace")
        fetch = lambda _url: FetchResult(status=200, html=html)
    else:
        fetch = HttpFetcher(timeout=timeout)
    outcome, _ = find_attribute_values(
        ExtractionKit(url=str(target)), fetch, ruleset_obj, clue_list)
    _print_outcome(outcome, as_json)
    sys.exit(EXIT_CODES[outcome.code])


def _service(store_path, timeout=15.0) -> TrackerService:
    return TrackerService(PageStore(store_path), fetcher=HttpFetcher(timeout=timeout))


_STORE_OPTION = click.option(
    "--store", "store_path", default="pricewatch.sqlite",
    envvar="PRICEWATCH_STORE", show_default=True,
    help="Path of the tracking database.")


@cli.command()
@click.argument("url")
@click.option("--html", "html_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Use this file as the page body instead of fetching.")
@_STORE_OPTION
def track(url, html_file, store_path):
    """Start following URL: store it and run the first extraction."""
    service = _service(store_path)
    inline = Path(html_file).read_text(encoding="utf-8", errors="replace") if html_file else None
    try:
        page, outcome = service.add_page(url, inline_html=inline)
    except PricewatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"{page['id']}  {_status(outcome.code)}  "
               f"{outcome.value if outcome.value else ''}".rstrip())


@cli.command()
@click.argument("page_id", required=False)
@click.option("--all", "all_pages", is_flag=True, help="Re-extract every tracked page.")
@_STORE_OPTION
def again(page_id, all_pages, store_path):
    """Run "find again" for one page (or --all)."""
    if bool(page_id) == all_pages:
        raise click.UsageError("give exactly one of PAGE_ID or --all")
    service = _service(store_path)
    ids = [p["id"] for p in service.list_pages()] if all_pages else [page_id]
    failed = False
    for pid in ids:
        try:
            outcome = service.find_again(pid)
        except NotFoundError:
            click.echo(f"{pid}: not found", err=True)
            failed = True
            continue
        click.echo(f"{pid}  {_status(outcome.code)}  "
                   f"{outcome.value if outcome.value else ''}".rstrip())
    sys.exit(1 if failed else 0)


@cli.command(name="list")
@_STORE_OPTION
@click.option("--json", "as_json", is_flag=True, help="Emit the listing as JSON.")
def list_cmd(store_path, as_json):
    """List tracked pages with their latest outcome."""
    pages = _service(store_path).list_pages()
    if as_json:
        click.echo(jsonlib.dumps(pages, indent=2))
        return
    if not pages:
        click.echo("no tracked pages")
        return
    for p in pages:
        value = p["latest_value"]
        shown = f"{value['amount']} {value['currency']}" if value else "-"
        click.echo(f"{p['id']}  {p['latest_outcome'] or '-':<16} {shown:<16} {p['url']}")


@cli.command()
@click.argument("page_id")
@_STORE_OPTION
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), default=None,
              help="Also render the price history as a PNG line chart.")
def history(page_id, store_path, plot_path):
    """Print the timestamped extraction history of a page."""
    service = _service(store_path)
    try:
        entries = service.history(page_id)
    except NotFoundError:
        click.echo("not found", err=True)
        sys.exit(1)
    for e in entries:
        shown = str(e.value) if e.value else "-"
        route = "from-scratch" if e.from_scratch else "pattern"
        click.echo(f"{e.timestamp}  {e.code:<16} {shown:<16} {route}")
    if plot_path:
        _plot_history(entries, plot_path)
        click.echo(f"wrote {plot_path}")


def _plot_history(entries, plot_path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from datetime import datetime

    xs = [datetime.fromisoformat(e.timestamp) for e in entries]
    ys = [float(e.value.amount) if e.value else float("nan") for e in entries]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(xs, ys, marker="o")
    ax.set_ylabel("price")
    ax.set_title("Extraction history")
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(plot_path, dpi=150)
    plt.close(fig)


@cli.command()
@click.option("--addr", default="127.0.0.1:8390", envvar="PRICEWATCH_ADDR",
              show_default=True, help="host:port to listen on.")
@_STORE_OPTION
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              envvar="PRICEWATCH_UI", help="Directory of built UI assets to serve at /ui/.")
@click.option("--ruleset", type=click.Path(exists=True, dir_okay=False), default=None,
              envvar="PRICEWATCH_RULESET")
@click.option("--clues", type=click.Path(exists=True, dir_okay=False), default=None,
              envvar="PRICEWATCH_CLUES")
@click.option("--timeout", type=float, default=15.0, envvar="PRICEWATCH_TIMEOUT",
              show_default=True, help="Fetch timeout in seconds.")
def serve(addr, store_path, ui_dir, ruleset, clues, timeout):
    """Run the tracking service (HTTP/JSON API, plus the UI if built)."""
    import uvicorn

    from .service import create_app

    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--addr must be host:port, got {addr!r}")
    service = TrackerService(
        PageStore(store_path),
        fetcher=HttpFetcher(timeout=timeout),
        ruleset=load_discarding_rules(ruleset),
        clues=load_clues(clues),
    )
    app = create_app(service, ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=int(port), log_level="info")


@cli.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="report",
              show_default=True, help="Directory for report.json/report.csv/figures.")
@click.option("--ruleset", type=click.Path(exists=True, dir_okay=False), default=None,
              envvar="PRICEWATCH_RULESET")
@click.option("--clues", type=click.Path(exists=True, dir_okay=False), default=None,
              envvar="PRICEWATCH_CLUES")
def evaluate(corpus_dir, out_dir, ruleset, clues):
    """Score the extractor on an annotated corpus."""
    report = evaluate_corpus(
        corpus_dir,
        ruleset=load_discarding_rules(ruleset),
        clues=load_clues(clues),
    )
    click.echo(format_table(report))
    written = write_report(report, out_dir)
    for path in written:
        click.echo(f"wrote {path}")


@cli.command()
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--sites", type=int, default=20, show_default=True,
              help="Number of regular sites (a dense 57-candidate page is always added).")
def corpus(out_dir, sites):
    """Build the synthetic fixture corpus for the evaluator."""
    built = build_fixture_corpus(out_dir, sites=sites)
    total = sum(b.fragment_count for b in built)
    click.echo(f"built {len(built)} sites, {total} fragments, under {out_dir}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return USAGE_EXIT
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())

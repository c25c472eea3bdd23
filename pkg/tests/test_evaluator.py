import json
from decimal import Decimal

import pytest

from pricewatch.corpus import build_fixture_corpus
from pricewatch.evaluator import (
    EvaluationReport,
    evaluate_corpus,
    format_table,
    load_corpus,
    score_page,
    write_report,
)
from pricewatch.fragments import load_clues
from pricewatch.money import PriceValue
from pricewatch.rules import default_ruleset

CLUES = load_clues()
RULESET = default_ruleset()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    dest = tmp_path_factory.mktemp("corpus")
    build_fixture_corpus(dest)
    return dest


def test_fixture_corpus_shape(corpus_dir):
    sites = sorted(p.name for p in corpus_dir.iterdir() if p.is_dir())
    assert len(sites) == 21
    assert "site_dense57" in sites
    for site in sites:
        assert (corpus_dir / site / "page.html").is_file()
        gold = json.loads((corpus_dir / site / "gold.json").read_text())
        assert {"url", "amount", "currency"} <= set(gold)


def test_fixture_corpus_scores_perfectly(corpus_dir):
    report = evaluate_corpus(corpus_dir)
    assert len(report.scores) == 21
    assert not report.skipped
    for score in report.scores:
        assert score.precision == 1.0, (score.site, score)
        assert score.specificity == 1.0, (score.site, score)
        assert score.tp == 1 and score.fn == 0 and score.fp == 0
    assert report.macro_precision == 1.0
    assert report.macro_specificity == 1.0
    assert report.micro_precision == 1.0
    assert report.micro_specificity == 1.0


def test_dense_page_counts(corpus_dir):
    report = evaluate_corpus(corpus_dir)
    dense = next(s for s in report.scores if s.site == "site_dense57")
    assert dense.fragment_count == 57
    assert dense.tp == 1 and dense.tn == 56


def test_counts_cover_all_fragments(corpus_dir):
    from pricewatch.engine import collect_fragments
    report = evaluate_corpus(corpus_dir)
    for score in report.scores:
        html = (corpus_dir / score.site / "page.html").read_text()
        assert score.fragment_count == len(collect_fragments(html, CLUES))


def test_audit_log_recomputes_matrix(corpus_dir):
    report = evaluate_corpus(corpus_dir)
    by_site = {}
    for record in report.audit:
        counts = by_site.setdefault(record["site"], {"tp": 0, "fp": 0, "tn": 0, "fn": 0})
        counts[record["label"]] += 1
    for score in report.scores:
        counts = by_site[score.site]
        assert (counts["tp"], counts["fp"], counts["tn"], counts["fn"]) == \
               (score.tp, score.fp, score.tn, score.fn)


def test_gold_discarded_is_degenerate():
    html = '<html><body><strike>&euro;10.00</strike></body></html>'
    gold = PriceValue(Decimal("10.00"), "EUR")
    score, audit = score_page(html, gold, RULESET, CLUES, "one")
    assert score.fn == 1 and score.tp == 0 and score.fp == 0
    assert score.precision == 0.0
    assert score.degenerate
    assert audit[0]["label"] == "fn"


def test_surviving_non_gold_is_fp():
    html = (
        '<html><body>'
        '<div class="main">&euro;10.00</div>'
        '<div class="other">&euro;25.00</div>'
        '</body></html>'
    )
    gold = PriceValue(Decimal("10.00"), "EUR")
    score, _ = score_page(html, gold, RULESET, CLUES, "one")
    assert score.tp == 1 and score.fp == 1 and score.tn == 0
    assert score.precision == 0.5
    assert score.specificity == 0.0


def test_currency_mismatch_is_not_gold():
    html = '<html><body><div class="main">$10.00</div></body></html>'
    gold = PriceValue(Decimal("10.00"), "EUR")
    score, _ = score_page(html, gold, RULESET, CLUES, "one")
    assert score.tp == 0 and score.fp == 1


def test_range_gold_matches_minimum():
    html = '<html><body><div class="main">&euro;99.00</div></body></html>'
    gold = PriceValue(Decimal("99.00"), "EUR", range=(Decimal("99"), Decimal("149")))
    score, _ = score_page(html, gold, RULESET, CLUES, "one")
    assert score.tp == 1


def test_unreadable_entry_reported_not_dropped(tmp_path):
    site = tmp_path / "bad_site"
    site.mkdir()
    (site / "gold.json").write_text("{not json")
    good = tmp_path / "good_site"
    good.mkdir()
    (good / "page.html").write_text('<div class="m">&euro;5.00</div>')
    (good / "gold.json").write_text(
        json.dumps({"url": "https://x.test", "amount": "5.00", "currency": "EUR"}))
    entries, skipped = load_corpus(tmp_path)
    assert [e.site for e in entries] == ["good_site"]
    assert skipped and skipped[0][0] == "bad_site"
    report = evaluate_corpus(tmp_path)
    assert len(report.scores) == 1
    assert report.skipped


def test_write_report_outputs(tmp_path, corpus_dir):
    report = evaluate_corpus(corpus_dir)
    out = tmp_path / "report"
    written = write_report(report, out)
    names = {p.name for p in written}
    assert {"report.json", "report.csv", "audit.jsonl",
            "scores_by_site.png", "confusion_totals.png"} <= names
    payload = json.loads((out / "report.json").read_text())
    assert payload["macro"]["precision"] == 1.0
    csv_lines = (out / "report.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 1 + len(report.scores)
    table = format_table(report)
    assert "macro precision" in table and "site_dense57" in table


def test_empty_report_metrics():
    report = EvaluationReport(scores=[], skipped=[], audit=[])
    assert report.macro_precision == 0.0
    table = format_table(report)
    assert "macro" in table

"""Corpus evaluation: precision and specificity over fragment-level
decisions.

The decision unit is a pre-rule fragment. A surviving fragment whose
parsed value equals the annotated price is a true positive; a surviving
non-gold fragment a false positive; a discarded non-gold fragment a
true negative; a discarded gold fragment a false negative. Per-site
scores are macro-averaged (micro aggregates are reported alongside).

Corpus layout: one directory per site holding `page.html` and
`gold.json` ({url, amount, currency, range?}).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .engine import collect_fragments
from .errors import ValueParseError
from .fragments import Clue, load_clues
from .money import PriceValue, parse_value
from .rules import RuleSet, apply_discarding_rules, load_discarding_rules


@dataclass(frozen=True)
class CorpusEntry:
    site: str
    html_path: Path
    gold: PriceValue
    url: str


@dataclass
class SiteScore:
    site: str
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    degenerate: bool = False  # no survivors although a gold fragment existed

    @property
    def fragment_count(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> float:
        if self.tp + self.fp == 0:
            return 1.0 if self.fn == 0 else 0.0
        return self.tp / (self.tp + self.fp)

    @property
    def specificity(self) -> float:
        if self.tn + self.fp == 0:
            return 1.0
        return self.tn / (self.tn + self.fp)


@dataclass
class EvaluationReport:
    scores: List[SiteScore]
    skipped: List[Tuple[str, str]]
    audit: List[dict]

    @property
    def macro_precision(self) -> float:
        return sum(s.precision for s in self.scores) / len(self.scores) if self.scores else 0.0

    @property
    def macro_specificity(self) -> float:
        return sum(s.specificity for s in self.scores) / len(self.scores) if self.scores else 0.0

    @property
    def micro_precision(self) -> float:
        tp = sum(s.tp for s in self.scores)
        fp = sum(s.fp for s in self.scores)
        fn = sum(s.fn for s in self.scores)
        if tp + fp == 0:
            return 1.0 if fn == 0 else 0.0
        return tp / (tp + fp)

    @property
    def micro_specificity(self) -> float:
        tn = sum(s.tn for s in self.scores)
        fp = sum(s.fp for s in self.scores)
        if tn + fp == 0:
            return 1.0
        return tn / (tn + fp)

    def to_dict(self) -> dict:
        return {
            "unit": "fragment-level decisions (pre-rule fragments)",
            "macro": {"precision": self.macro_precision,
                      "specificity": self.macro_specificity},
            "micro": {"precision": self.micro_precision,
                      "specificity": self.micro_specificity},
            "sites": [{
                "site": s.site, "tp": s.tp, "fp": s.fp, "tn": s.tn, "fn": s.fn,
                "precision": s.precision, "specificity": s.specificity,
                "fragments": s.fragment_count, "degenerate": s.degenerate,
            } for s in self.scores],
            "skipped": [{"site": site, "reason": reason}
                        for site, reason in self.skipped],
        }


def load_corpus(corpus_dir: Union[str, Path]) -> Tuple[List[CorpusEntry], List[Tuple[str, str]]]:
    """Read corpus entries; unreadable ones are reported, never dropped
    silently."""
    corpus_dir = Path(corpus_dir)
    entries: List[CorpusEntry] = []
    skipped: List[Tuple[str, str]] = []
    for site_dir in sorted(p for p in corpus_dir.iterdir() if p.is_dir()):
        html_path = site_dir / "page.html"
        gold_path = site_dir / "gold.json"
        try:
            gold_raw = json.loads(gold_path.read_text(encoding="utf-8"))
            gold = PriceValue.from_dict(gold_raw)
            if not html_path.is_file():
                raise FileNotFoundError("page.html missing")
        except Exception as exc:
            skipped.append((site_dir.name, str(exc)))
            continue
        entries.append(CorpusEntry(
            site=site_dir.name, html_path=html_path, gold=gold,
            url=gold_raw.get("url", "")))
    return entries, skipped


def _is_gold(parsed: Optional[PriceValue], gold: PriceValue) -> bool:
    # A fragment carries a single amount; a range gold matches on its
    # minimum, which equals gold.amount by construction.
    if parsed is None:
        return False
    return parsed.amount == gold.amount and parsed.currency_code == gold.currency_code


def score_page(html: str, gold: PriceValue, ruleset: RuleSet,
               clues: Sequence[Clue], site: str) -> Tuple[SiteScore, List[dict]]:
    fragments = collect_fragments(html, clues)
    apply_discarding_rules(ruleset, fragments)
    score = SiteScore(site=site)
    audit: List[dict] = []
    for f in fragments:
        parsed: Optional[PriceValue] = None
        try:
            parsed = PriceValue(parse_value(f.value_text), f.clue.currency_code)
        except (ValueParseError, ValueError):
            parsed = None
        survived = not f.deleted
        is_gold = _is_gold(parsed, gold)
        if survived and is_gold:
            label = "tp"
            score.tp += 1
        elif survived:
            label = "fp"
            score.fp += 1
        elif is_gold:
            label = "fn"
            score.fn += 1
        else:
            label = "tn"
            score.tn += 1
        audit.append({
            "site": site,
            "offset": f.offset,
            "pre": f.pre,
            "value_text": f.value_text,
            "parsed": str(parsed.amount) if parsed else None,
            "currency": f.clue.currency_code,
            "deleted": f.deleted,
            "deleted_by": f.deleted_by,
            "label": label,
        })
    score.degenerate = score.tp + score.fp == 0 and score.fn > 0
    return score, audit


def evaluate_corpus(
    corpus_dir: Union[str, Path],
    ruleset: Optional[RuleSet] = None,
    clues: Optional[Sequence[Clue]] = None,
) -> EvaluationReport:
    ruleset = ruleset or load_discarding_rules(None)
    clues = list(clues) if clues is not None else load_clues(None)
    entries, skipped = load_corpus(corpus_dir)
    scores: List[SiteScore] = []
    audit: List[dict] = []
    for entry in entries:
        try:
            html = entry.html_path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            skipped.append((entry.site, str(exc)))
            continue
        score, page_audit = score_page(html, entry.gold, ruleset, clues, entry.site)
        scores.append(score)
        audit.extend(page_audit)
    return EvaluationReport(scores=scores, skipped=skipped, audit=audit)


def format_table(report: EvaluationReport) -> str:
    lines = [
        "Scoring unit: fragment-level decisions (pre-rule fragments per page).",
        "",
        f"{'site':<28} {'tp':>3} {'fp':>3} {'tn':>4} {'fn':>3} "
        f"{'precision':>9} {'specificity':>11}",
    ]
    for s in report.scores:
        flag = " *" if s.degenerate else ""
        lines.append(
            f"{s.site:<28} {s.tp:>3} {s.fp:>3} {s.tn:>4} {s.fn:>3} "
            f"{s.precision:>9.4f} {s.specificity:>11.4f}{flag}")
    lines.append("")
    lines.append(f"macro precision   {report.macro_precision:.4f}")
    lines.append(f"macro specificity {report.macro_specificity:.4f}")
    lines.append(f"micro precision   {report.micro_precision:.4f}")
    lines.append(f"micro specificity {report.micro_specificity:.4f}")
    if any(s.degenerate for s in report.scores):
        lines.append("* no survivors although the page carries the gold price")
    for site, reason in report.skipped:
        lines.append(f"skipped {site}: {reason}")
    return "\n".join(lines)


def render_figures(report: EvaluationReport, out_dir: Path) -> List[Path]:
    """Per-site metric bars and confusion totals, written as PNG files."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written: List[Path] = []
    if not report.scores:
        return written
    sites = [s.site for s in report.scores]
    xs = range(len(sites))

    fig, ax = plt.subplots(figsize=(max(6.0, 0.45 * len(sites)), 4.0))
    width = 0.4
    ax.bar([x - width / 2 for x in xs], [s.precision for s in report.scores],
           width=width, label="precision")
    ax.bar([x + width / 2 for x in xs], [s.specificity for s in report.scores],
           width=width, label="specificity")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(sites, rotation=75, ha="right", fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("Per-site precision and specificity")
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = out_dir / "scores_by_site.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    totals = {
        "tp": sum(s.tp for s in report.scores),
        "fp": sum(s.fp for s in report.scores),
        "tn": sum(s.tn for s in report.scores),
        "fn": sum(s.fn for s in report.scores),
    }
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.bar(list(totals), list(totals.values()))
    for i, v in enumerate(totals.values()):
        ax.text(i, v, str(v), ha="center", va="bottom")
    ax.set_title("Fragment decisions across the corpus")
    fig.tight_layout()
    path = out_dir / "confusion_totals.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def write_report(report: EvaluationReport, out_dir: Union[str, Path]) -> List[Path]:
    """Emit report.json, report.csv, audit.jsonl and the figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                         encoding="utf-8")
    written.append(json_path)

    csv_path = out_dir / "report.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site", "tp", "fp", "tn", "fn",
                         "precision", "specificity", "fragments", "degenerate"])
        for s in report.scores:
            writer.writerow([s.site, s.tp, s.fp, s.tn, s.fn,
                             f"{s.precision:.6f}", f"{s.specificity:.6f}",
                             s.fragment_count, int(s.degenerate)])
    written.append(csv_path)

    audit_path = out_dir / "audit.jsonl"
    with open(audit_path, "w", encoding="utf-8") as fh:
        for record in report.audit:
            fh.write(json.dumps(record) + "\n")
    written.append(audit_path)

    written.extend(render_figures(report, out_dir))
    return written

"""Deterministic fixture corpus for the evaluator.

Builds synthetic detail pages where exactly one fragment carries the
annotated price and every other candidate is discardable by the default
rules: crossed-out prices, script-embedded prices, discount callouts,
and repeated related-item listings. One page carries 57 candidates
(1 positive, 56 negatives) to exercise a heavily decorated layout.

The on-disk layout (per-site `page.html` + `gold.json`) is the same one
the evaluator accepts for external datasets.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import List, Set, Union

from .money import parse_value

CLUE_STYLES = [
    ("&euro;", "EUR", "before"),
    ("€", "EUR", "after"),
    ("$", "USD", "before"),
    ("£", "GBP", "before"),
    ("EUR ", "EUR", "before"),
]

SAFE_SENTENCES = [
    "Free returns for thirty days.",
    "Ships in recyclable packaging.",
    "Customer questions answered within one business day.",
    "Hand finished by the original maker.",
    "Batteries included in the retail box.",
]


def _letters(rng: random.Random, length: int = 10) -> str:
    return "".join(rng.choice("bcdfghjklmnpqrstvwxz") for _ in range(length))


class _PageBuilder:
    def __init__(self, rng: random.Random, clue: str, order: str):
        self.rng = rng
        self.clue = clue
        self.order = order
        self.used_values: Set[Decimal] = set()
        self.used_classes: Set[str] = set()
        self.blocks: List[str] = []
        self.fragment_count = 0

    def _cls(self) -> str:
        while True:
            name = _letters(self.rng)
            if name[:9] not in {c[:9] for c in self.used_classes}:
                self.used_classes.add(name)
                return name

    def _amount(self) -> str:
        while True:
            units = self.rng.randint(1, 999)
            cents = self.rng.randint(0, 99)
            sep = self.rng.choice([".", ","])
            text = f"{units}{sep}{cents:02d}"
            value = parse_value(text)
            if value not in self.used_values:
                self.used_values.add(value)
                return text

    def _price(self, text: str) -> str:
        if self.order == "before":
            return f"{self.clue}{text}"
        return f"{text}{self.clue}"

    def gold(self) -> str:
        text = self._amount()
        self.blocks.append(f'<div class="{self._cls()}">{self._price(text)}</div>')
        self.fragment_count += 1
        return text

    def strike(self) -> None:
        self.blocks.append(f"<strike>{self._price(self._amount())}</strike>")
        self.fragment_count += 1

    def script(self) -> None:
        self.blocks.append(
            f'<script>var p = "{self.clue}{self._amount()}";</script>')
        self.fragment_count += 1

    def save(self) -> None:
        self.blocks.append(
            f'<div class="{self._cls()}">Save {self.clue}{self._amount()}</div>')
        self.fragment_count += 1

    def related_group(self, size: int) -> None:
        cls = self._cls()
        for _ in range(size):
            self.blocks.append(
                f'<span class="{cls}">{self._price(self._amount())}</span>')
            self.fragment_count += 1

    def prefix_group(self, size: int) -> None:
        core = self._cls()[:8]
        for i in range(size):
            self.blocks.append(
                f'<li class="{core}" data-n="{i}">{self._price(self._amount())}</li>')
            self.fragment_count += 1

    def html(self, title: str) -> str:
        rng = self.rng
        parts = [f"<html><head><title>{title}</title></head><body>",
                 f"<h1>{title}</h1>"]
        for block in self.blocks:
            parts.append(f"<p>{rng.choice(SAFE_SENTENCES)}</p>")
            parts.append(block)
        parts.append("</body></html>")
        return "\n".join(parts)


@dataclass(frozen=True)
class BuiltSite:
    name: str
    fragment_count: int


def build_fixture_corpus(dest: Union[str, Path], sites: int = 20) -> List[BuiltSite]:
    """Write the fixture corpus under dest; returns the site inventory."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20260810)
    built: List[BuiltSite] = []

    for i in range(sites):
        clue, currency, order = CLUE_STYLES[i % len(CLUE_STYLES)]
        b = _PageBuilder(rng, clue, order)
        gold_text = b.gold()
        b.strike()
        b.script()
        for _ in range(rng.randint(1, 2)):
            b.save()
        b.related_group(rng.randint(3, 5))
        if rng.random() < 0.6:
            b.prefix_group(3)
        rng.shuffle(b.blocks)
        name = f"site{i + 1:02d}"
        built.append(_write_site(dest, name, b, gold_text, currency))

    # The heavily decorated layout: 1 positive among 56 negatives.
    clue, currency, order = ("&euro;", "EUR", "before")
    b = _PageBuilder(rng, clue, order)
    gold_text = b.gold()
    for _ in range(4):
        b.strike()
    for _ in range(4):
        b.script()
    for _ in range(4):
        b.save()
    for _ in range(5):
        b.related_group(6)
    for _ in range(2):
        b.prefix_group(7)
    assert b.fragment_count == 57, b.fragment_count
    rng.shuffle(b.blocks)
    built.append(_write_site(dest, "site_dense57", b, gold_text, currency))
    return built


def _write_site(dest: Path, name: str, b: _PageBuilder,
                gold_text: str, currency: str) -> BuiltSite:
    site_dir = dest / name
    site_dir.mkdir(parents=True, exist_ok=True)
    url = f"https://{name}.example.test/product"
    (site_dir / "page.html").write_text(
        b.html(f"Catalog item at {name}"), encoding="utf-8")
    gold = {"url": url, "amount": str(parse_value(gold_text)), "currency": currency}
    (site_dir / "gold.json").write_text(
        json.dumps(gold, indent=2) + "\n", encoding="utf-8")
    return BuiltSite(name=name, fragment_count=b.fragment_count)

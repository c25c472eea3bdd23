"""Extraction engine: the from-scratch pipeline, pattern-based
re-extraction, and the dispatcher that picks between them.

The dispatcher's outcome codes map one-to-one onto result tuples:
OK -> (True, value), PAGE_UNAVAILABLE -> (False, -1),
MANY_PRICES -> (False, -2), NO_PRICE -> (False, 0).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .errors import FetchError, PatternError, ValueParseError
from .fragments import Clue, Fragment, find_associated_fragments
from .money import PriceValue, parse_value
from .patterns import PointingPattern, extract_pointing_pattern, extract_value_from_match, match_pattern
from .rules import RuleSet, apply_discarding_rules

# Two surviving values this close, joined by a dash or "to", read as a
# single min-max price.
PAIR_GAP_LIMIT = 32
_PAIR_JOINER_RE = re.compile(r"[-‐–—]|\bto\b", re.IGNORECASE)


class OutcomeCode(enum.Enum):
    OK = "OK"
    PAGE_UNAVAILABLE = "PAGE_UNAVAILABLE"
    NO_PRICE = "NO_PRICE"
    MANY_PRICES = "MANY_PRICES"


@dataclass
class ExtractionOutcome:
    code: OutcomeCode
    value: Optional[PriceValue] = None
    candidates: Tuple[PriceValue, ...] = ()
    used_pattern: Optional[PointingPattern] = None
    from_scratch: bool = False

    def __post_init__(self):
        if (self.code is OutcomeCode.OK) != (self.value is not None):
            raise ValueError("value present iff code is OK")

    def as_tuple(self) -> Tuple[bool, Union[PriceValue, int]]:
        if self.code is OutcomeCode.OK:
            return (True, self.value)
        return (False, {
            OutcomeCode.PAGE_UNAVAILABLE: -1,
            OutcomeCode.MANY_PRICES: -2,
            OutcomeCode.NO_PRICE: 0,
        }[self.code])

    def to_dict(self) -> dict:
        d: dict = {"code": self.code.value, "from_scratch": self.from_scratch}
        if self.value is not None:
            d["value"] = self.value.to_dict()
        if self.candidates:
            d["candidates"] = [v.to_dict() for v in self.candidates]
        return d


@dataclass
class ExtractionKit:
    """Per-URL bundle of pointing patterns, consulted newest first.

    Patterns are only ever appended; timestamps never decrease.
    """

    url: str
    patterns: List[PointingPattern] = field(default_factory=list)

    def add_pattern(self, pp: PointingPattern, timestamp: Optional[datetime] = None) -> PointingPattern:
        ts = timestamp or datetime.now(timezone.utc)
        if self.patterns and ts < self.patterns[-1].created_at:
            ts = self.patterns[-1].created_at
        stamped = pp.stamped(ts)
        self.patterns.append(stamped)
        return stamped

    def iter_newest_first(self) -> List[PointingPattern]:
        indexed = list(enumerate(self.patterns))
        indexed.sort(key=lambda p: (p[1].created_at, p[0]), reverse=True)
        return [pp for _, pp in indexed]


@dataclass(frozen=True)
class FetchResult:
    status: int
    html: str
    truncated: bool = False


Fetcher = Callable[[str], FetchResult]


def collect_fragments(html: str, clues: Sequence[Clue]) -> List[Fragment]:
    """Gather fragments for every clue, in clue order."""
    fragments: List[Fragment] = []
    for clue in clues:
        fragments.extend(find_associated_fragments(html, clue))
    return fragments


def _parse_fragment_value(f: Fragment) -> Optional[PriceValue]:
    try:
        amount = parse_value(f.value_text)
        return PriceValue(amount=amount, currency_code=f.clue.currency_code)
    except (ValueParseError, ValueError):
        return None  # amount missing, malformed, or non-positive


def _collapse_pair(
    values: List[Tuple[PriceValue, Fragment]], html: str
) -> List[Tuple[PriceValue, Fragment]]:
    """Fold exactly two surviving values into one (min, max) price when
    their fragments share a pre or sit adjacent across a dash/"to"."""
    if len(values) != 2:
        return values
    (va, fa), (vb, fb) = values
    if va.currency_code != vb.currency_code:
        return values
    first, second = sorted((fa, fb), key=lambda f: f.offset)
    between = html[first.offset + len(first.raw):second.offset]
    adjacent = len(between) <= PAIR_GAP_LIMIT and _PAIR_JOINER_RE.search(between)
    if fa.pre != fb.pre and not adjacent:
        return values
    (lo, flo), (hi, _) = sorted(values, key=lambda pair: pair[0].amount)
    merged = PriceValue(amount=lo.amount, currency_code=lo.currency_code,
                        range=(lo.amount, hi.amount))
    return [(merged, flo)]


def do_from_scratch_extraction(
    html: str, ruleset: RuleSet, clues: Sequence[Clue]
) -> Tuple[Optional[PointingPattern], List[PriceValue]]:
    """Full pipeline: fragments, discarding rules, distinct values.

    A pattern is synthesized only when exactly one value remains (after
    min-max pairs collapse to a single range value).
    """
    fragments = collect_fragments(html, clues)
    apply_discarding_rules(ruleset, fragments)
    candidates = [f for f in fragments if not f.deleted]

    distinct: List[Tuple[PriceValue, Fragment]] = []
    seen = set()
    for f in candidates:
        value = _parse_fragment_value(f)
        if value is None or value in seen:
            continue
        seen.add(value)
        distinct.append((value, f))

    distinct = _collapse_pair(distinct, html)
    values = [v for v, _ in distinct]
    pattern = None
    if len(distinct) == 1:
        pattern = extract_pointing_pattern(distinct[0][1])
    return pattern, values


def do_pointing_pattern_extraction(html: str, pp: PointingPattern) -> List[PriceValue]:
    """Match the pattern and accumulate the distinct extracted values."""
    values: List[PriceValue] = []
    for matched in match_pattern(html, pp):
        try:
            value = extract_value_from_match(matched, pp)
        except (PatternError, ValueError):
            continue
        if value not in values:
            values.append(value)
    return values


def find_attribute_values(
    kit: ExtractionKit,
    fetch: Fetcher,
    ruleset: RuleSet,
    clues: Sequence[Clue],
    now: Optional[datetime] = None,
) -> Tuple[ExtractionOutcome, ExtractionKit]:
    """Dispatch: try stored patterns newest-first, else extract from
    scratch; on a unique fresh value, append the new pattern to the kit.

    Existing patterns are never removed.
    """
    try:
        page = fetch(kit.url)
    except FetchError:
        return ExtractionOutcome(OutcomeCode.PAGE_UNAVAILABLE), kit
    if page.status >= 400 or not page.html:
        return ExtractionOutcome(OutcomeCode.PAGE_UNAVAILABLE), kit

    values: List[PriceValue] = []
    used: Optional[PointingPattern] = None
    for pp in kit.iter_newest_first():
        values = do_pointing_pattern_extraction(page.html, pp)
        if values:
            used = pp
            break

    if len(values) == 1:
        return ExtractionOutcome(OutcomeCode.OK, value=values[0], used_pattern=used), kit
    if len(values) > 1:
        return ExtractionOutcome(
            OutcomeCode.MANY_PRICES, candidates=tuple(values), used_pattern=used), kit

    pattern, fresh = do_from_scratch_extraction(page.html, ruleset, clues)
    if not fresh:
        return ExtractionOutcome(OutcomeCode.NO_PRICE, from_scratch=True), kit
    if len(fresh) > 1:
        return ExtractionOutcome(
            OutcomeCode.MANY_PRICES, candidates=tuple(fresh), from_scratch=True), kit
    if pattern is not None:
        kit.add_pattern(replace(pattern, source_url=kit.url), timestamp=now)
    return ExtractionOutcome(OutcomeCode.OK, value=fresh[0], from_scratch=True), kit

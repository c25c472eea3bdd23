"""Pointing patterns: regular expressions synthesized from a surviving
fragment, used to re-extract the price cheaply on later visits.

The expression anchors on the distinctive tail of the fragment's start
tag, keeps the clue (and any text between tag and amount) literal, and
widens the integer digits one order of magnitude downward so a price
drop still matches. A price growing a digit deliberately fails, forcing
a fresh extraction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import List, Optional, Tuple

from .errors import PatternError, SynthesisError, ValueParseError
from .fragments import Fragment
from .money import PriceValue, parse_value, split_number

# Anchors shorter than this don't discriminate; longer ones overfit.
ANCHOR_MIN = 6
ANCHOR_MAX = 24

# re.escape also escapes &, #, ~ and spaces; expressions stay readable
# (and match the conventional rendering) when only true regex
# metacharacters are escaped.
_META_RE = re.compile(r"[.^$*+?{}\[\]\\|()]")


def escape_literal(text: str) -> str:
    return _META_RE.sub(lambda m: "\\" + m.group(0), text)


@dataclass(frozen=True)
class PointingPattern:
    expression: str
    currency_code: str
    created_at: datetime
    source_url: str = ""

    def __post_init__(self):
        re.compile(self.expression)  # invariant: must compile
        if _numeric_regions(self.expression) is None:
            raise PatternError(f"no integer region in {self.expression!r}")

    def stamped(self, ts: datetime) -> "PointingPattern":
        return replace(self, created_at=ts)

    def to_dict(self) -> dict:
        return {
            "expression": self.expression,
            "currency": self.currency_code,
            "created_at": self.created_at.isoformat(),
            "source_url": self.source_url,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PointingPattern":
        return cls(
            expression=d["expression"],
            currency_code=d["currency"],
            created_at=datetime.fromisoformat(d["created_at"]),
            source_url=d.get("source_url", ""),
        )


def _anchor(pre: str) -> str:
    """Distinctive tail of the start tag, ending at its closing `>`.

    Candidate cut points sit after token boundaries (space, quote,
    equals, `<`); the rightmost one yielding 6-24 characters wins. A
    short pre is used whole, an unbreakable long one keeps its last 24
    characters.
    """
    if len(pre) <= ANCHOR_MIN:
        return pre
    boundaries = [0] + [i + 1 for i, ch in enumerate(pre) if ch in " \t\"'=<"]
    for b in sorted(set(boundaries), reverse=True):
        if ANCHOR_MIN <= len(pre) - b <= ANCHOR_MAX:
            return pre[b:]
    if len(pre) <= ANCHOR_MAX:
        return pre
    return pre[-ANCHOR_MAX:]


def _integer_pattern(d: int, thousands_sep: Optional[str]) -> str:
    base = f"[0-9]{{{max(1, d - 1)},{d}}}"
    if thousands_sep and d >= 4:
        # Also accept the rendering with one separator, e.g. 1,299.
        return f"(?:{base}|[0-9]{{1,3}}{escape_literal(thousands_sep)}[0-9]{{3}})"
    return base


def extract_pointing_pattern(fragment: Fragment, source_url: str = "",
                             created_at: Optional[datetime] = None) -> PointingPattern:
    """Synthesize a pattern from a non-deleted fragment."""
    if fragment.deleted:
        raise SynthesisError("cannot synthesize from a deleted fragment")
    if not fragment.value_text or fragment.value_span is None:
        raise SynthesisError("fragment has no located amount")
    try:
        parse_value(fragment.value_text)
        parts = split_number(fragment.value_text)
    except ValueParseError as exc:
        raise SynthesisError(str(exc)) from exc

    raw, pre = fragment.raw, fragment.pre
    vstart, vend = fragment.value_span
    cstart, cend = fragment.clue_span
    d = len(parts.int_digits)
    expr = escape_literal(_anchor(pre))
    expr += escape_literal(raw[len(pre):vstart])
    expr += _integer_pattern(d, parts.thousands_sep)
    if parts.dec_digits is not None:
        expr += escape_literal(parts.dec_sep) + "[0-9]{1,2}"
    if cstart >= vend:
        # Amount-first rendering: keep the trailing clue literal.
        expr += escape_literal(raw[vend:cend])
    return PointingPattern(
        expression=expr,
        currency_code=fragment.clue.currency_code,
        created_at=created_at or datetime.now(timezone.utc),
        source_url=source_url,
    )


def match_pattern(html: str, pp: PointingPattern) -> List[str]:
    """All non-overlapping matches of the pattern, in document order."""
    return [m.group(0) for m in re.finditer(pp.expression, html)]


# Numeric-region tokens as emitted by extract_pointing_pattern. The
# alternation branch must be tried first so it is consumed whole.
_INT_REGION_RE = re.compile(
    r"\(\?:\[0-9\]\{\d+,\d+\}\|\[0-9\]\{1,3\}(?:\\.|[^\\])\[0-9\]\{3\}\)"
    r"|\[0-9\]\{\d+,\d+\}"
)
_DEC_REGION_RE = re.compile(r"\[0-9\]\{1,2\}")


def _numeric_regions(expression: str) -> Optional[Tuple[Tuple[int, int], Optional[Tuple[int, int]]]]:
    m = _INT_REGION_RE.search(expression)
    if m is None:
        return None
    dec = _DEC_REGION_RE.search(expression, m.end())
    return m.span(), (dec.span() if dec else None)


def capture_expression(expression: str) -> str:
    """The same expression with the integer and decimal regions grouped."""
    regions = _numeric_regions(expression)
    if regions is None:
        raise PatternError(f"no integer region in {expression!r}")
    (istart, iend), dec = regions
    if dec is None:
        return f"{expression[:istart]}({expression[istart:iend]}){expression[iend:]}"
    dstart, dend = dec
    return (
        f"{expression[:istart]}({expression[istart:iend]})"
        f"{expression[iend:dstart]}({expression[dstart:dend]}){expression[dend:]}"
    )


def extract_value_from_match(matched: str, pp: PointingPattern) -> PriceValue:
    """Pull the amount out of a string produced by match_pattern."""
    m = re.fullmatch(capture_expression(pp.expression), matched)
    if m is None or not m.groups():
        raise PatternError(f"match {matched!r} does not re-parse under {pp.expression!r}")
    int_digits = re.sub(r"\D", "", m.group(1))
    literal = int_digits
    if len(m.groups()) > 1 and m.group(2) is not None:
        literal += "." + m.group(2)
    return PriceValue(amount=parse_value(literal), currency_code=pp.currency_code)

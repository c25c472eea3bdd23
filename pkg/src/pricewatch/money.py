"""Monetary amounts and locale-tolerant number parsing.

Amount text found in the wild mixes dot and comma conventions
("142.29", "19,95", "1.299,50", "1,299.00"). The parser decides which
separator is decimal from the shape of the token alone:

* both separators present: the one occurring last is decimal;
* a single separator followed by 1-2 digits is decimal;
* anything else is a thousands separator and is dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Optional, Tuple

from .errors import ValueParseError

# A run of digits possibly interrupted by dot/comma groups: 142.29, 1.299,50
NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)*")

CENT = Decimal("0.01")


@dataclass(frozen=True)
class NumberParts:
    """A numeric token split into its rendering components."""

    int_digits: str
    dec_digits: Optional[str] = None
    dec_sep: Optional[str] = None
    thousands_sep: Optional[str] = None


def split_number(token: str) -> NumberParts:
    """Split a raw numeric token into integer/decimal parts.

    Raises ValueParseError when the token has no digits.
    """
    m = NUMBER_RE.search(token)
    if not m:
        raise ValueParseError(f"no number in {token!r}")
    t = m.group(0)
    dots = t.count(".")
    commas = t.count(",")
    if dots and commas:
        dec_sep = "." if t.rfind(".") > t.rfind(",") else ","
        thou_sep = "," if dec_sep == "." else "."
        head, _, tail = t.rpartition(dec_sep)
        return NumberParts(
            int_digits=re.sub(r"\D", "", head),
            dec_digits=tail,
            dec_sep=dec_sep,
            thousands_sep=thou_sep if thou_sep in head else None,
        )
    sep = "." if dots else ("," if commas else None)
    if sep is None:
        return NumberParts(int_digits=t)
    head, _, tail = t.rpartition(sep)
    if t.count(sep) == 1 and 1 <= len(tail) <= 2:
        return NumberParts(int_digits=re.sub(r"\D", "", head),
                           dec_digits=tail, dec_sep=sep)
    return NumberParts(int_digits=re.sub(r"\D", "", t), thousands_sep=sep)


def parse_value(text: str) -> Decimal:
    """Parse a monetary amount out of text, normalized to 2 decimal places.

    Currency is not interpreted here; callers attach it.
    """
    parts = split_number(text)
    if not parts.int_digits:
        raise ValueParseError(f"no integer digits in {text!r}")
    literal = parts.int_digits
    if parts.dec_digits:
        literal += "." + parts.dec_digits
    return Decimal(literal).quantize(CENT, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class PriceValue:
    """A parsed price: a positive amount, or a (min, max) pair for ranges.

    For ranges, `amount` equals the range minimum so single-value and
    range prices compare and sort uniformly.
    """

    amount: Decimal
    currency_code: str
    range: Optional[Tuple[Decimal, Decimal]] = None

    def __post_init__(self):
        object.__setattr__(self, "amount", self.amount.quantize(CENT))
        if self.range is not None:
            lo, hi = self.range
            object.__setattr__(self, "range", (lo.quantize(CENT), hi.quantize(CENT)))
        if self.amount <= 0:
            raise ValueError(f"amount must be positive, got {self.amount}")
        if self.range is not None:
            lo, hi = self.range
            if lo > hi:
                raise ValueError(f"range minimum {lo} exceeds maximum {hi}")
            if self.amount != lo:
                raise ValueError("amount must equal the range minimum")

    def __str__(self) -> str:
        if self.range:
            lo, hi = self.range
            return f"{lo}-{hi} {self.currency_code}"
        return f"{self.amount} {self.currency_code}"

    def to_dict(self) -> dict:
        d = {"amount": str(self.amount), "currency": self.currency_code}
        if self.range:
            d["range"] = [str(self.range[0]), str(self.range[1])]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PriceValue":
        rng = d.get("range")
        return cls(
            amount=Decimal(str(d["amount"])),
            currency_code=d["currency"],
            range=(Decimal(str(rng[0])), Decimal(str(rng[1]))) if rng else None,
        )

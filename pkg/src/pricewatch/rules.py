"""Discarding rules: condition-action rules that mark fragments as
non-price-bearing.

Four families exist. Syntactic rules look at how the fragment starts,
semantic rules at words near the amount, frequency rules at repetition
across the page, threshold rules at the amount itself. Deletion is a
mark, never removal; the first rule to fire owns the attribution.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple, Union

from .errors import ConfigError, ValueParseError
from .fragments import Fragment
from .money import parse_value

FAMILIES = ("syntactic", "semantic", "frequency", "threshold")

# Marks a fragment whose amount text failed to parse: a fragmenter miss,
# not a rule decision.
UNPARSEABLE = "unparseable"

DEFAULT_SEMANTIC_WINDOW = 40


@dataclass(frozen=True)
class DiscardingRule:
    """One condition-action rule. Family decides which parameters apply."""

    name: str
    family: str
    enabled: bool = True
    # syntactic
    prefix: str = ""
    # semantic
    words: Tuple[str, ...] = ()
    window: int = DEFAULT_SEMANTIC_WINDOW
    # frequency: counter is "pre" or "first-n-chars"
    counter: str = "pre"
    n: int = 0
    x: int = 0
    # threshold
    min: Optional[Decimal] = None
    max: Optional[Decimal] = None


@dataclass(frozen=True)
class RuleSet:
    rules: Tuple[DiscardingRule, ...]
    version: str = "builtin"

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(names) != len(set(names)):
            raise ConfigError("duplicate rule names in ruleset")

    def with_threshold(self, min: Decimal, max: Decimal) -> "RuleSet":
        """Copy of this set with the threshold rule enabled and bounded."""
        rules = tuple(
            replace(r, enabled=True, min=min, max=max)
            if r.family == "threshold" else r
            for r in self.rules
        )
        return RuleSet(rules=rules, version=self.version)


# "Save" comes from the rule inventory; the rest are shipped extensions.
DEFAULT_SEMANTIC_WORDS = ("save", "saving", "discount", "was", "off", "rrp", "list price")


def default_ruleset() -> RuleSet:
    return RuleSet(rules=(
        DiscardingRule("syr1", "syntactic", prefix="<strike"),
        DiscardingRule("syr2", "syntactic", prefix="<script"),
        DiscardingRule("semr1", "semantic", words=DEFAULT_SEMANTIC_WORDS,
                       window=DEFAULT_SEMANTIC_WINDOW),
        DiscardingRule("fr1", "frequency", counter="pre", x=3),
        DiscardingRule("fr2", "frequency", counter="first-n-chars", n=21, x=3),
        DiscardingRule("thresr1", "threshold", enabled=False),
    ))


def default_ruleset_path() -> Path:
    """Path of the shipped ruleset file (mirrors the built-in defaults)."""
    return Path(str(resources.files("pricewatch").joinpath("data/rules.conf")))


def _get(section, rule_name: str, key: str) -> str:
    if key not in section:
        raise ConfigError(f"rule {rule_name!r}: missing parameter {key!r}")
    return section[key]


def load_discarding_rules(source: Union[str, Path, None] = None) -> RuleSet:
    """Load a ruleset file, or the built-in defaults when source is None.

    The format is INI-style key-value records, one section per rule; an
    optional [ruleset] section carries a version string.
    """
    if source is None:
        return default_ruleset()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(source, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read ruleset {source}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed ruleset {source}: {exc}") from exc

    version = "custom"
    rules: List[DiscardingRule] = []
    for name in parser.sections():
        section = parser[name]
        if name == "ruleset":
            version = section.get("version", version)
            continue
        family = _get(section, name, "family").strip()
        enabled = section.getboolean("enabled", fallback=True)
        if family == "syntactic":
            rules.append(DiscardingRule(
                name, family, enabled, prefix=_get(section, name, "prefix")))
        elif family == "semantic":
            words = tuple(
                w.strip().lower()
                for w in _get(section, name, "words").split(",") if w.strip()
            )
            if not words:
                raise ConfigError(f"rule {name!r}: empty word list")
            window = section.getint("window", fallback=DEFAULT_SEMANTIC_WINDOW)
            rules.append(DiscardingRule(name, family, enabled, words=words, window=window))
        elif family == "frequency":
            counter = _get(section, name, "counter").strip()
            if counter not in ("pre", "first-n-chars"):
                raise ConfigError(f"rule {name!r}: unknown counter {counter!r}")
            try:
                x = int(_get(section, name, "x"))
                n = int(_get(section, name, "n")) if counter == "first-n-chars" else 0
            except ValueError as exc:
                raise ConfigError(f"rule {name!r}: {exc}") from exc
            rules.append(DiscardingRule(name, family, enabled, counter=counter, n=n, x=x))
        elif family == "threshold":
            lo = section.get("min")
            hi = section.get("max")
            if enabled and (lo is None or hi is None):
                raise ConfigError(f"rule {name!r}: enabled threshold needs min and max")
            rules.append(DiscardingRule(
                name, family, enabled,
                min=Decimal(lo) if lo is not None else None,
                max=Decimal(hi) if hi is not None else None,
            ))
        else:
            raise ConfigError(f"rule {name!r}: unknown family {family!r}")
    return RuleSet(rules=tuple(rules), version=version)


def apply_rule_syntactic(rule: DiscardingRule, fragments: List[Fragment]) -> List[Fragment]:
    """Delete fragments whose raw begins with the rule's prefix.

    The comparison is case-insensitive so `<STRIKE>` falls to `<strike`.
    """
    prefix = rule.prefix.lower()
    for f in fragments:
        if not f.deleted and f.raw[:len(prefix)].lower() == prefix:
            f.mark_deleted(rule.name)
    return fragments


def _span_gap(a: Tuple[int, int], b: Tuple[int, int]) -> int:
    if a[1] <= b[0]:
        return b[0] - a[1]
    if b[1] <= a[0]:
        return a[0] - b[1]
    return 0


def apply_rule_semantic(rule: DiscardingRule, fragments: List[Fragment]) -> List[Fragment]:
    """Delete fragments with a rule word near the amount in their body."""
    for f in fragments:
        if f.deleted:
            continue
        value_span = None
        if f.value_text and f.value_span:
            value_span = (f.value_span[0] - len(f.pre), f.value_span[1] - len(f.pre))
        for word in rule.words:
            hit = False
            for m in re.finditer(re.escape(word), f.body, re.IGNORECASE):
                # No located amount: any occurrence counts as near.
                if value_span is None or _span_gap(m.span(), value_span) <= rule.window:
                    hit = True
                    break
            if hit:
                f.mark_deleted(rule.name)
                break
    return fragments


def apply_rule_frequency(rule: DiscardingRule, fragments: List[Fragment]) -> List[Fragment]:
    """Delete every fragment in a repetition group of size >= x.

    Groups are counted over all fragments of the page, deleted or not,
    so the outcome does not depend on rule order.
    """
    if rule.counter == "pre":
        key = lambda f: f.pre
    else:
        key = lambda f: f.raw[:rule.n]
    counts: dict[str, int] = {}
    for f in fragments:
        counts[key(f)] = counts.get(key(f), 0) + 1
    for f in fragments:
        if counts[key(f)] >= rule.x:
            f.mark_deleted(rule.name)
    return fragments


def _interval(f: Fragment) -> Optional[Tuple[Decimal, Decimal]]:
    try:
        v = parse_value(f.value_text)
    except ValueParseError:
        return None
    return (v, v)


def apply_rule_threshold(
    rule: DiscardingRule,
    fragments: List[Fragment],
    min: Optional[Decimal] = None,
    max: Optional[Decimal] = None,
) -> List[Fragment]:
    """Delete fragments whose amount lies outside [min, max], inclusive.

    A (min, max) pair survives as long as it intersects the allowed
    interval. Fragments with no parseable amount are marked with the
    `unparseable` pseudo-rule.
    """
    lo = min if min is not None else rule.min
    hi = max if max is not None else rule.max
    for f in fragments:
        if f.deleted:
            continue
        interval = _interval(f)
        if interval is None:
            f.mark_deleted(UNPARSEABLE)
            continue
        vlo, vhi = interval
        if (lo is not None and vhi < lo) or (hi is not None and vlo > hi):
            f.mark_deleted(rule.name)
    return fragments


_APPLIERS = {
    "syntactic": apply_rule_syntactic,
    "semantic": apply_rule_semantic,
    "frequency": apply_rule_frequency,
    "threshold": apply_rule_threshold,
}


def apply_discarding_rules(ruleset: RuleSet, fragments: List[Fragment]) -> List[Fragment]:
    """Apply every enabled rule in set order. Never un-deletes."""
    for rule in ruleset.rules:
        if not rule.enabled:
            continue
        _APPLIERS[rule.family](rule, fragments)
    return fragments

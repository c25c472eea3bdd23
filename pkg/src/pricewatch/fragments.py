"""Currency-clue detection and fragment carving.

A fragment is the innermost HTML element enclosing an occurrence of a
currency clue, carved straight out of the raw page text. No DOM is
built: a lightweight tag scan tolerates the malformed markup real
product pages ship.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .errors import ConfigError
from .money import NUMBER_RE

# Tags that cannot enclose content and are skipped when resolving the
# element around a clue.
VOID_TAGS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# Tag-soup tokenizer: quoted attribute values may contain '>'.
TAG_RE = re.compile(
    r"<(/?)([a-zA-Z][a-zA-Z0-9:_-]*)((?:\"[^\"]*\"|'[^']*'|[^>\"'])*)(/?)>"
)

# Stop searching for a matching end tag this far past the start tag.
END_TAG_SEARCH_LIMIT = 2048
# Window emitted past the clue when no end tag matches.
FALLBACK_WINDOW = 160


@dataclass(frozen=True)
class Clue:
    """A literal token signalling a price, tied to one currency."""

    literal: str
    currency_code: str

    def __post_init__(self):
        if not self.literal or not self.literal.strip():
            raise ValueError("clue literal must be non-empty")


DEFAULT_CLUES: Tuple[Clue, ...] = (
    Clue("&euro;", "EUR"),
    Clue("€", "EUR"),
    Clue("&#8364;", "EUR"),
    Clue("EUR", "EUR"),
    Clue("$", "USD"),
    Clue("USD", "USD"),
    Clue("£", "GBP"),
    Clue("&pound;", "GBP"),
    Clue("GBP", "GBP"),
)


def load_clues(source: Union[str, Path, None] = None) -> List[Clue]:
    """Load the clue table, or the built-in defaults when source is None.

    The table is UTF-8 text, one `literal<TAB>currency_code` entry per
    line; `#` starts a comment. A literal may appear only once.
    """
    if source is None:
        return list(DEFAULT_CLUES)
    text = Path(source).read_text(encoding="utf-8")
    clues: List[Clue] = []
    seen: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.rstrip()
        # Literals may contain '#' (&#8364;), so only whole-line comments.
        if not stripped or stripped.lstrip().startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1].strip():
            raise ConfigError(f"{source}:{lineno}: expected 'literal<TAB>currency_code'")
        literal, code = parts[0], parts[1].strip()
        if literal in seen:
            if seen[literal] != code:
                raise ConfigError(
                    f"{source}:{lineno}: literal {literal!r} mapped to both "
                    f"{seen[literal]} and {code}"
                )
            continue
        seen[literal] = code
        clues.append(Clue(literal, code))
    return clues


def default_clue_table_path() -> Path:
    """Path of the shipped clue table (mirrors the built-in defaults)."""
    return Path(str(resources.files("pricewatch").joinpath("data/clues.tsv")))


@dataclass
class Fragment:
    """An HTML substring around a clue occurrence.

    `raw` spans the start tag through the matching end tag (or a fixed
    window on malformed markup), `pre` is the start tag including
    attributes, `body` is raw minus the enclosing tags. Spans are
    raw-relative; `offset` locates raw in the page.
    """

    raw: str
    pre: str
    body: str
    clue: Clue
    value_text: str
    offset: int
    deleted: bool = False
    deleted_by: Optional[str] = None
    clue_span: Tuple[int, int] = (0, 0)
    value_span: Optional[Tuple[int, int]] = None

    def mark_deleted(self, rule_name: str) -> None:
        # First rule wins: attribution never changes once set.
        if not self.deleted:
            self.deleted = True
            self.deleted_by = rule_name


@dataclass(frozen=True)
class _Tag:
    start: int
    end: int
    name: str
    is_close: bool
    is_self_closing: bool


def _scan_tags(html: str) -> List[_Tag]:
    tags = []
    for m in TAG_RE.finditer(html):
        closing, name, _, selfclose = m.groups()
        tags.append(_Tag(
            start=m.start(),
            end=m.end(),
            name=name.lower(),
            is_close=bool(closing),
            is_self_closing=bool(selfclose) or name.lower() in VOID_TAGS,
        ))
    return tags


def iter_clue_occurrences(html: str, clue: Clue) -> Iterator[Tuple[int, int]]:
    """Yield (start, end) spans of the clue in the page.

    Entities and symbols match exactly; alphabetic codes (EUR, usd)
    match case-insensitively but never inside a longer word, so `eur`
    does not fire inside `&euro;` or `Europe`.
    """
    lit = clue.literal
    if lit.isalpha():
        for m in re.finditer(re.escape(lit), html, re.IGNORECASE):
            before = html[m.start() - 1] if m.start() > 0 else ""
            after = html[m.end()] if m.end() < len(html) else ""
            if before.isalpha() or after.isalpha():
                continue
            yield m.start(), m.end()
    else:
        pos = html.find(lit)
        while pos != -1:
            yield pos, pos + len(lit)
            pos = html.find(lit, pos + len(lit))


def _enclosing_start_tag(tags: Sequence[_Tag], occ_start: int) -> Optional[_Tag]:
    """Nearest start tag before occ_start not already closed before it."""
    # Only tags fully emitted before the occurrence count; a clue inside
    # a tag's own source resolves to the surrounding element.
    close_counts: dict[str, int] = {}
    for tag in reversed([t for t in tags if t.end <= occ_start]):
        if tag.is_close:
            close_counts[tag.name] = close_counts.get(tag.name, 0) + 1
        elif tag.is_self_closing:
            continue
        elif close_counts.get(tag.name, 0) > 0:
            close_counts[tag.name] -= 1
        else:
            return tag
    return None


def _matching_end(tags: Sequence[_Tag], start_tag: _Tag) -> Optional[_Tag]:
    """Find the end tag balancing start_tag by a per-name depth count."""
    depth = 1
    limit = start_tag.end + END_TAG_SEARCH_LIMIT
    for tag in tags:
        if tag.start < start_tag.end or tag.name != start_tag.name:
            continue
        if tag.start > limit:
            return None
        if tag.is_close:
            depth -= 1
            if depth == 0:
                return tag
        elif not tag.is_self_closing:
            depth += 1
    return None


def _nearest_value_token(body: str, clue_start: int, clue_end: int) -> Optional[Tuple[str, Tuple[int, int]]]:
    """Numeric token in body nearest the clue, ignoring tokens inside it.

    Ties (equal gap before and after) go to the token after the clue,
    where prices usually sit.
    """
    best = None
    for m in NUMBER_RE.finditer(body):
        if m.start() < clue_end and m.end() > clue_start:
            continue  # digits inside the clue itself (e.g. &#8364;)
        if m.end() <= clue_start:
            gap, side = clue_start - m.end(), 1
        else:
            gap, side = m.start() - clue_end, 0
        key = (gap, side, m.start())
        if best is None or key < best[0]:
            best = (key, m)
    if best is None:
        return None
    m = best[1]
    return m.group(0), (m.start(), m.end())


def find_associated_fragments(html: str, clue: Clue) -> List[Fragment]:
    """Carve one fragment per clue occurrence with a resolvable element.

    Occurrences resolving to the same element merge into one fragment
    carrying the first occurrence's value text. Results come back in
    ascending offset order.
    """
    tags = _scan_tags(html)
    fragments: dict[Tuple[int, int], Fragment] = {}
    for occ_start, occ_end in iter_clue_occurrences(html, clue):
        start_tag = _enclosing_start_tag(tags, occ_start)
        if start_tag is None:
            continue  # no completed start tag before the clue: nothing to anchor
        end_tag = _matching_end(tags, start_tag)
        if end_tag is not None and end_tag.start >= occ_end:
            span = (start_tag.start, end_tag.end)
            body_end = end_tag.start - start_tag.start
        else:
            # Malformed page: emit a window past the clue instead.
            span = (start_tag.start, min(len(html), occ_end + FALLBACK_WINDOW))
            body_end = span[1] - span[0]
        if span in fragments:
            continue
        raw = html[span[0]:span[1]]
        pre = html[start_tag.start:start_tag.end]
        body = raw[len(pre):body_end]
        clue_span = (occ_start - span[0], occ_end - span[0])
        body_clue = (clue_span[0] - len(pre), clue_span[1] - len(pre))
        found = _nearest_value_token(body, *body_clue)
        if found:
            value_text, (vs, ve) = found
            value_span = (vs + len(pre), ve + len(pre))
        else:
            value_text, value_span = "", None
        fragments[span] = Fragment(
            raw=raw, pre=pre, body=body, clue=clue,
            value_text=value_text, offset=span[0],
            clue_span=clue_span, value_span=value_span,
        )
    return sorted(fragments.values(), key=lambda f: (f.offset, len(f.raw)))

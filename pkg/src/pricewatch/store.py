"""Persistence and the tracking workflow.

A single SQLite file holds tracked pages, their extraction kits,
append-only price histories, and the page snapshot behind each
extraction, so any stored outcome can be replayed offline. Every
acknowledged write is one committed transaction.
"""

from __future__ import annotations

import json
import re
import sqlite3
import threading
import uuid
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
from urllib.parse import urlparse

from .engine import ExtractionKit, ExtractionOutcome, FetchResult, find_attribute_values
from .errors import DuplicateUrlError, NotFoundError
from .fetch import HttpFetcher
from .fragments import Clue, load_clues
from .money import PriceValue
from .patterns import PointingPattern
from .rules import RuleSet, load_discarding_rules

_SCHEMA = """
CREATE TABLE IF NOT EXISTS pages (
    id TEXT PRIMARY KEY,
    url TEXT NOT NULL UNIQUE,
    title TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS patterns (
    page_id TEXT NOT NULL REFERENCES pages(id),
    seq INTEGER NOT NULL,
    expression TEXT NOT NULL,
    currency TEXT NOT NULL,
    created_at TEXT NOT NULL,
    source_url TEXT NOT NULL DEFAULT '',
    PRIMARY KEY (page_id, seq)
);
CREATE TABLE IF NOT EXISTS history (
    page_id TEXT NOT NULL REFERENCES pages(id),
    seq INTEGER NOT NULL,
    timestamp TEXT NOT NULL,
    code TEXT NOT NULL,
    value_json TEXT,
    candidates_json TEXT,
    from_scratch INTEGER NOT NULL,
    used_pattern_seq INTEGER,
    kit_size_before INTEGER NOT NULL,
    PRIMARY KEY (page_id, seq)
);
CREATE TABLE IF NOT EXISTS snapshots (
    page_id TEXT NOT NULL REFERENCES pages(id),
    seq INTEGER NOT NULL,
    fetched_at TEXT NOT NULL,
    http_status INTEGER NOT NULL,
    truncated INTEGER NOT NULL DEFAULT 0,
    html TEXT NOT NULL,
    PRIMARY KEY (page_id, seq)
);
"""

_TITLE_RE = re.compile(r"<title[^>]*>(.*?)</title>", re.IGNORECASE | re.DOTALL)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _pattern_row(pp: PointingPattern) -> Tuple[str, str, str, str]:
    return (pp.expression, pp.currency_code, pp.created_at.isoformat(), pp.source_url)


def _pattern_from_row(row) -> PointingPattern:
    return PointingPattern(
        expression=row["expression"],
        currency_code=row["currency"],
        created_at=datetime.fromisoformat(row["created_at"]),
        source_url=row["source_url"],
    )


def _outcome_rows(outcome: ExtractionOutcome) -> Tuple[Optional[str], Optional[str]]:
    value = json.dumps(outcome.value.to_dict()) if outcome.value else None
    candidates = (
        json.dumps([v.to_dict() for v in outcome.candidates])
        if outcome.candidates else None
    )
    return value, candidates


@dataclass
class HistoryEntry:
    seq: int
    timestamp: str
    code: str
    value: Optional[PriceValue]
    candidates: Tuple[PriceValue, ...]
    from_scratch: bool
    used_pattern_seq: Optional[int]
    kit_size_before: int

    def to_dict(self) -> dict:
        d = {"timestamp": self.timestamp, "code": self.code,
             "from_scratch": self.from_scratch}
        if self.value is not None:
            d["value"] = self.value.to_dict()
        if self.candidates:
            d["candidates"] = [v.to_dict() for v in self.candidates]
        return d


class PageStore:
    """SQLite-backed page/kit/history store. One connection per call;
    the file's own locking serializes writers."""

    def __init__(self, path: Union[str, Path]):
        self.path = str(path)
        with self._tx() as conn:
            conn.executescript(_SCHEMA)

    @contextmanager
    def _tx(self):
        conn = sqlite3.connect(self.path, timeout=30.0)
        conn.row_factory = sqlite3.Row
        try:
            with conn:  # one transaction, committed on success
                yield conn
        finally:
            conn.close()

    # -- writes ----------------------------------------------------------

    def create_page(
        self,
        url: str,
        title: Optional[str],
        outcome: ExtractionOutcome,
        patterns: Sequence[PointingPattern],
        snapshot: Optional[FetchResult],
    ) -> str:
        page_id = uuid.uuid4().hex[:12]
        now = _now()
        value_json, candidates_json = _outcome_rows(outcome)
        try:
            with self._tx() as conn:
                conn.execute(
                    "INSERT INTO pages (id, url, title, created_at) VALUES (?,?,?,?)",
                    (page_id, url, title, now))
                for seq, pp in enumerate(patterns):
                    conn.execute(
                        "INSERT INTO patterns (page_id, seq, expression, currency,"
                        " created_at, source_url) VALUES (?,?,?,?,?,?)",
                        (page_id, seq, *_pattern_row(pp)))
                used = patterns.index(outcome.used_pattern) if outcome.used_pattern else None
                conn.execute(
                    "INSERT INTO history (page_id, seq, timestamp, code, value_json,"
                    " candidates_json, from_scratch, used_pattern_seq, kit_size_before)"
                    " VALUES (?,?,?,?,?,?,?,?,?)",
                    (page_id, 0, now, outcome.code.value, value_json,
                     candidates_json, int(outcome.from_scratch), used, 0))
                if snapshot is not None:
                    conn.execute(
                        "INSERT INTO snapshots (page_id, seq, fetched_at, http_status,"
                        " truncated, html) VALUES (?,?,?,?,?,?)",
                        (page_id, 0, now, snapshot.status,
                         int(snapshot.truncated), snapshot.html))
        except sqlite3.IntegrityError:
            existing = self.find_by_url(url)
            raise DuplicateUrlError(url, existing["id"] if existing else "?")
        return page_id

    def append_result(
        self,
        page_id: str,
        outcome: ExtractionOutcome,
        new_patterns: Sequence[PointingPattern],
        kit_size_before: int,
        used_pattern_seq: Optional[int],
        snapshot: Optional[FetchResult],
    ) -> int:
        value_json, candidates_json = _outcome_rows(outcome)
        now = _now()
        with self._tx() as conn:
            row = conn.execute(
                "SELECT COALESCE(MAX(seq), -1) + 1 AS next FROM history WHERE page_id=?",
                (page_id,)).fetchone()
            seq = row["next"]
            for i, pp in enumerate(new_patterns):
                conn.execute(
                    "INSERT INTO patterns (page_id, seq, expression, currency,"
                    " created_at, source_url) VALUES (?,?,?,?,?,?)",
                    (page_id, kit_size_before + i, *_pattern_row(pp)))
            conn.execute(
                "INSERT INTO history (page_id, seq, timestamp, code, value_json,"
                " candidates_json, from_scratch, used_pattern_seq, kit_size_before)"
                " VALUES (?,?,?,?,?,?,?,?,?)",
                (page_id, seq, now, outcome.code.value, value_json,
                 candidates_json, int(outcome.from_scratch),
                 used_pattern_seq, kit_size_before))
            if snapshot is not None:
                conn.execute(
                    "INSERT INTO snapshots (page_id, seq, fetched_at, http_status,"
                    " truncated, html) VALUES (?,?,?,?,?,?)",
                    (page_id, seq, now, snapshot.status,
                     int(snapshot.truncated), snapshot.html))
        return seq

    # -- reads -----------------------------------------------------------

    def get_page(self, page_id: str) -> dict:
        with self._tx() as conn:
            row = conn.execute("SELECT * FROM pages WHERE id=?", (page_id,)).fetchone()
        if row is None:
            raise NotFoundError(f"no page with id {page_id!r}")
        return dict(row)

    def find_by_url(self, url: str) -> Optional[dict]:
        with self._tx() as conn:
            row = conn.execute("SELECT * FROM pages WHERE url=?", (url,)).fetchone()
        return dict(row) if row else None

    def load_kit(self, page_id: str) -> ExtractionKit:
        page = self.get_page(page_id)
        with self._tx() as conn:
            rows = conn.execute(
                "SELECT * FROM patterns WHERE page_id=? ORDER BY seq", (page_id,)
            ).fetchall()
        return ExtractionKit(url=page["url"],
                             patterns=[_pattern_from_row(r) for r in rows])

    def list_pages(self) -> List[dict]:
        with self._tx() as conn:
            rows = conn.execute(
                "SELECT p.id, p.url, p.title, p.created_at,"
                " h.code, h.value_json, h.timestamp AS checked_at"
                " FROM pages p LEFT JOIN history h ON h.page_id = p.id"
                " AND h.seq = (SELECT MAX(seq) FROM history WHERE page_id = p.id)"
                " ORDER BY p.created_at, p.id").fetchall()
        out = []
        for r in rows:
            value = json.loads(r["value_json"]) if r["value_json"] else None
            out.append({
                "id": r["id"],
                "url": r["url"],
                "title": r["title"],
                "latest_outcome": r["code"],
                "latest_value": value,
                "checked_at": r["checked_at"],
            })
        return out

    def history(self, page_id: str) -> List[HistoryEntry]:
        self.get_page(page_id)
        with self._tx() as conn:
            rows = conn.execute(
                "SELECT * FROM history WHERE page_id=? ORDER BY seq", (page_id,)
            ).fetchall()
        entries = []
        for r in rows:
            value = PriceValue.from_dict(json.loads(r["value_json"])) if r["value_json"] else None
            candidates = tuple(
                PriceValue.from_dict(d) for d in json.loads(r["candidates_json"])
            ) if r["candidates_json"] else ()
            entries.append(HistoryEntry(
                seq=r["seq"], timestamp=r["timestamp"], code=r["code"],
                value=value, candidates=candidates,
                from_scratch=bool(r["from_scratch"]),
                used_pattern_seq=r["used_pattern_seq"],
                kit_size_before=r["kit_size_before"],
            ))
        return entries

    def kit_rows(self, page_id: str) -> List[dict]:
        self.get_page(page_id)
        with self._tx() as conn:
            rows = conn.execute(
                "SELECT * FROM patterns WHERE page_id=? ORDER BY seq", (page_id,)
            ).fetchall()
        return [{"expression": r["expression"], "currency": r["currency"],
                 "created_at": r["created_at"]} for r in rows]

    def snapshot(self, page_id: str, seq: int) -> Optional[FetchResult]:
        with self._tx() as conn:
            row = conn.execute(
                "SELECT * FROM snapshots WHERE page_id=? AND seq=?",
                (page_id, seq)).fetchone()
        if row is None:
            return None
        return FetchResult(status=row["http_status"], html=row["html"],
                           truncated=bool(row["truncated"]))


class _RecordingFetch:
    """Wraps a fetcher, remembering the last response for the snapshot."""

    def __init__(self, fetch: Callable[[str], FetchResult]):
        self._fetch = fetch
        self.result: Optional[FetchResult] = None

    def __call__(self, url: str) -> FetchResult:
        self.result = self._fetch(url)
        return self.result


def validate_url(url: str) -> str:
    parsed = urlparse(url)
    if parsed.scheme not in ("http", "https") or not parsed.netloc:
        raise ValueError(f"not a valid http(s) url: {url!r}")
    return url


def extract_title(html: str) -> Optional[str]:
    m = _TITLE_RE.search(html)
    if not m:
        return None
    title = re.sub(r"\s+", " ", m.group(1)).strip()
    return title[:200] or None


class TrackerService:
    """The tracking workflow over a PageStore.

    Writes to any single page are serialized by a per-page lock; the
    engine itself holds no shared state.
    """

    def __init__(
        self,
        store: PageStore,
        fetcher: Optional[Callable[[str], FetchResult]] = None,
        ruleset: Optional[RuleSet] = None,
        clues: Optional[Sequence[Clue]] = None,
    ):
        self.store = store
        self.fetcher = fetcher or HttpFetcher()
        self.ruleset = ruleset or load_discarding_rules(None)
        self.clues = list(clues) if clues is not None else load_clues(None)
        self._locks: Dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def _page_lock(self, page_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks[page_id]

    def add_page(self, url: str, inline_html: Optional[str] = None) -> Tuple[dict, ExtractionOutcome]:
        """Track a new page and run its first extraction.

        inline_html substitutes for fetching: the caller already has the
        page body (the browser-side path).
        """
        validate_url(url)
        existing = self.store.find_by_url(url)
        if existing:
            raise DuplicateUrlError(url, existing["id"])
        if inline_html is not None:
            fetch = _RecordingFetch(lambda _: FetchResult(status=200, html=inline_html))
        else:
            fetch = _RecordingFetch(self.fetcher)
        kit = ExtractionKit(url=url)
        outcome, kit = self._run(kit, fetch)
        title = extract_title(fetch.result.html) if fetch.result else None
        page_id = self.store.create_page(
            url, title, outcome, kit.patterns, self._snapshot_of(fetch))
        return self.store.get_page(page_id), outcome

    def find_again(self, page_id: str) -> ExtractionOutcome:
        """Re-run the extraction for a tracked page and append the result."""
        with self._page_lock(page_id):
            kit = self.store.load_kit(page_id)
            size_before = len(kit.patterns)
            fetch = _RecordingFetch(self.fetcher)
            outcome, kit = self._run(kit, fetch)
            used_seq = None
            if outcome.used_pattern is not None:
                used_seq = kit.patterns.index(outcome.used_pattern)
            self.store.append_result(
                page_id, outcome,
                new_patterns=kit.patterns[size_before:],
                kit_size_before=size_before,
                used_pattern_seq=used_seq,
                snapshot=self._snapshot_of(fetch),
            )
        return outcome

    def _run(self, kit: ExtractionKit, fetch) -> Tuple[ExtractionOutcome, ExtractionKit]:
        return find_attribute_values(kit, fetch, self.ruleset, self.clues)

    @staticmethod
    def _snapshot_of(fetch: _RecordingFetch) -> Optional[FetchResult]:
        if fetch.result is not None and fetch.result.html:
            return fetch.result
        return None

    def list_pages(self) -> List[dict]:
        return self.store.list_pages()

    def history(self, page_id: str) -> List[HistoryEntry]:
        return self.store.history(page_id)

    def kit(self, page_id: str) -> List[dict]:
        return self.store.kit_rows(page_id)

    def replay(self, page_id: str, seq: int) -> Optional[ExtractionOutcome]:
        """Re-run the engine on a stored snapshot with the kit as it was.

        Returns None when the entry has no snapshot (fetch failed).
        """
        entries = {e.seq: e for e in self.store.history(page_id)}
        if seq not in entries:
            raise NotFoundError(f"no history entry {seq} for page {page_id}")
        entry = entries[seq]
        snapshot = self.store.snapshot(page_id, seq)
        if snapshot is None:
            return None
        kit = self.store.load_kit(page_id)
        kit.patterns = kit.patterns[:entry.kit_size_before]
        outcome, _ = find_attribute_values(
            kit, lambda _: snapshot, self.ruleset, self.clues)
        return outcome

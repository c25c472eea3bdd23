"""Live page retrieval."""

from __future__ import annotations

from dataclasses import dataclass

import requests

from .engine import FetchResult
from .errors import FetchError

MAX_BODY_BYTES = 5 * 1024 * 1024


@dataclass
class HttpFetcher:
    """GET with bounded redirects and a body-size cap.

    Bodies are decoded as UTF-8 with replacement; anything over the cap
    is truncated and flagged.
    """

    timeout: float = 15.0
    max_redirects: int = 5
    max_bytes: int = MAX_BODY_BYTES

    def __call__(self, url: str) -> FetchResult:
        session = requests.Session()
        session.max_redirects = self.max_redirects
        try:
            with session.get(url, timeout=self.timeout, allow_redirects=True,
                             stream=True) as resp:
                chunks = []
                received = 0
                for chunk in resp.iter_content(chunk_size=65536):
                    chunks.append(chunk)
                    received += len(chunk)
                    if received > self.max_bytes:
                        break
                body = b"".join(chunks)
                status = resp.status_code
        except requests.RequestException as exc:
            raise FetchError(str(exc)) from exc
        truncated = len(body) > self.max_bytes
        html = body[:self.max_bytes].decode("utf-8", errors="replace")
        return FetchResult(status=status, html=html, truncated=truncated)

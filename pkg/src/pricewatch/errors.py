"""Exception types shared across the package."""


class PricewatchError(Exception):
    """Base class for all package errors."""


class ConfigError(PricewatchError):
    """A clue table or ruleset file could not be parsed."""


class ValueParseError(PricewatchError):
    """A text snippet does not contain a parseable monetary amount."""


class SynthesisError(PricewatchError):
    """A pointing pattern could not be built from a fragment."""


class PatternError(PricewatchError):
    """A pointing pattern is structurally broken (missing numeric regions)."""


class FetchError(PricewatchError):
    """A page could not be retrieved (network failure, timeout, bad URL)."""


class NotFoundError(PricewatchError):
    """No tracked page with the given id."""


class DuplicateUrlError(PricewatchError):
    """The URL is already tracked."""

    def __init__(self, url: str, existing_id: str):
        super().__init__(f"url already tracked: {url}")
        self.url = url
        self.existing_id = existing_id

"""pricewatch: clue-based price extraction and follow-up for product pages."""

from .engine import (
    ExtractionKit,
    ExtractionOutcome,
    FetchResult,
    OutcomeCode,
    collect_fragments,
    do_from_scratch_extraction,
    do_pointing_pattern_extraction,
    find_attribute_values,
)
from .errors import (
    ConfigError,
    DuplicateUrlError,
    FetchError,
    NotFoundError,
    PatternError,
    PricewatchError,
    SynthesisError,
    ValueParseError,
)
from .fragments import Clue, Fragment, find_associated_fragments, load_clues
from .money import PriceValue, parse_value
from .patterns import PointingPattern, extract_pointing_pattern, extract_value_from_match, match_pattern
from .rules import DiscardingRule, RuleSet, apply_discarding_rules, default_ruleset, load_discarding_rules

__version__ = "0.1.0"

__all__ = [
    "Clue",
    "ConfigError",
    "DiscardingRule",
    "DuplicateUrlError",
    "ExtractionKit",
    "ExtractionOutcome",
    "FetchError",
    "FetchResult",
    "Fragment",
    "NotFoundError",
    "OutcomeCode",
    "PatternError",
    "PointingPattern",
    "PriceValue",
    "PricewatchError",
    "RuleSet",
    "SynthesisError",
    "ValueParseError",
    "apply_discarding_rules",
    "collect_fragments",
    "default_ruleset",
    "do_from_scratch_extraction",
    "do_pointing_pattern_extraction",
    "extract_pointing_pattern",
    "extract_value_from_match",
    "find_associated_fragments",
    "find_attribute_values",
    "load_clues",
    "load_discarding_rules",
    "match_pattern",
    "parse_value",
]

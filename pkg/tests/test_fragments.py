import random

import pytest

from pricewatch.errors import ConfigError
from pricewatch.fragments import (
    Clue,
    DEFAULT_CLUES,
    find_associated_fragments,
    load_clues,
)

import brute
from pagegen import gen_page

EURO = Clue("&euro;", "EUR")


def test_load_clues_defaults():
    clues = load_clues()
    table = {c.literal: c.currency_code for c in clues}
    assert table["&euro;"] == "EUR"
    assert table["€"] == "EUR"
    assert table["&#8364;"] == "EUR"
    assert table["EUR"] == "EUR"
    assert table["$"] == "USD"
    assert table["USD"] == "USD"
    assert table["£"] == "GBP"
    assert table["GBP"] == "GBP"


def test_load_clues_empty_table(tmp_path):
    path = tmp_path / "clues.tsv"
    path.write_text("# nothing here\n", encoding="utf-8")
    assert load_clues(path) == []


def test_load_clues_duplicate_literal_conflict(tmp_path):
    path = tmp_path / "clues.tsv"
    path.write_text("$\tUSD\n$\tCAD\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_clues(path)
    assert "$" in str(err.value)


def test_load_clues_malformed_line_names_position(tmp_path):
    path = tmp_path / "clues.tsv"
    path.write_text("&euro;\tEUR\nbroken line\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_clues(path)
    assert ":2" in str(err.value)


def test_shipped_clue_table_matches_defaults():
    from pricewatch.fragments import default_clue_table_path
    assert load_clues(default_clue_table_path()) == list(DEFAULT_CLUES)


def test_basic_fragment():
    html = '<div class="Wprice">&euro;142.29</div>'
    frags = find_associated_fragments(html, EURO)
    assert len(frags) == 1
    f = frags[0]
    assert f.pre == '<div class="Wprice">'
    assert f.raw == html
    assert f.body == "&euro;142.29"
    assert f.value_text == "142.29"
    assert f.offset == 0
    assert not f.deleted and f.deleted_by is None


def test_no_clue_occurrences():
    assert find_associated_fragments("<p>hello there</p>", EURO) == []


def test_nine_distinct_elements_match_brute_count():
    parts = ["<html><body>"]
    for i in range(9):
        parts.append(f'<div class="p{i}">&euro;{i + 1}.00</div>')
    parts.append("</body></html>")
    html = "".join(parts)
    frags = find_associated_fragments(html, EURO)
    assert len(frags) == 9
    assert len(brute.brute_fragments(html, "&euro;", "EUR")) == 9


def test_value_before_clue():
    frags = find_associated_fragments("<span>19,95&euro;</span>", EURO)
    assert frags[0].value_text == "19,95"


def test_occurrences_in_same_element_merge():
    html = '<div class="p">&euro;10.00 (&euro;12.00 with gift wrap)</div>'
    frags = find_associated_fragments(html, EURO)
    assert len(frags) == 1
    assert frags[0].value_text == "10.00"


def test_alphabetic_clue_is_token_bounded():
    eur = Clue("EUR", "EUR")
    assert find_associated_fragments("<p>visit Europe now</p>", eur) == []
    assert find_associated_fragments("<p>&euro;5.00</p>", eur) == []
    frags = find_associated_fragments("<p>EUR 25.00</p>", eur)
    assert len(frags) == 1
    assert frags[0].value_text == "25.00"
    assert len(find_associated_fragments("<p>eur 25.00</p>", eur)) == 1


def test_entity_clue_is_case_sensitive():
    assert find_associated_fragments("<p>&EURO;5</p>", EURO) == []


def test_malformed_page_falls_back_to_window():
    html = '<div class="p">&euro;9.99 and the tag never closes ' + "x" * 4000
    frags = find_associated_fragments(html, EURO)
    assert len(frags) == 1
    f = frags[0]
    assert f.pre == '<div class="p">'
    assert f.raw.startswith("<")
    assert len(f.raw) < 400
    assert f.value_text == "9.99"


def test_clue_before_any_start_tag_is_skipped():
    assert find_associated_fragments("&euro;5.00 <p>x</p>", EURO) == []


def test_clue_in_attribute_value_resolves_to_outer_element():
    html = '<div class="outer"><img alt="&euro;5.00"> text</div>'
    frags = find_associated_fragments(html, EURO)
    assert len(frags) == 1
    assert frags[0].pre == '<div class="outer">'


def test_nested_elements_resolve_innermost():
    html = '<div class="outer"><span class="inner">&euro;7.50</span></div>'
    frags = find_associated_fragments(html, EURO)
    assert len(frags) == 1
    assert frags[0].pre == '<span class="inner">'


@pytest.mark.parametrize("seed", range(25))
def test_invariants_on_generated_pages(seed):
    rng = random.Random(seed)
    page = gen_page(rng)
    html = page.html
    for clue in DEFAULT_CLUES:
        frags = find_associated_fragments(html, clue)
        occs = list(brute.clue_occurrences(html, clue.literal))
        assert len(frags) <= len(occs)
        seen = set()
        for f in frags:
            assert html[f.offset:f.offset + len(f.raw)] == f.raw
            assert f.raw.startswith("<")
            assert f.pre == f.raw[:f.raw.index(">") + 1]
            assert clue.literal.lower() in f.body.lower()
            assert (f.offset, f.raw) not in seen
            seen.add((f.offset, f.raw))
        offsets = [f.offset for f in frags]
        assert offsets == sorted(offsets)
        # determinism
        again = find_associated_fragments(html, clue)
        assert [(g.offset, g.raw, g.value_text) for g in again] == \
               [(f.offset, f.raw, f.value_text) for f in frags]


@pytest.mark.parametrize("seed", range(25))
def test_fragments_agree_with_brute_oracle(seed):
    rng = random.Random(seed + 1000)
    html = gen_page(rng).html
    for clue in DEFAULT_CLUES:
        mine = find_associated_fragments(html, clue)
        ref = brute.brute_fragments(html, clue.literal, clue.currency_code)
        assert [(f.offset, f.raw, f.pre, f.value_text) for f in mine] == \
               [(f.offset, f.raw, f.pre, f.value_text) for f in ref]

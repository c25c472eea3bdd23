import threading

import pytest

from pricewatch.engine import OutcomeCode
from pricewatch.errors import DuplicateUrlError, FetchError, NotFoundError
from pricewatch.fetch import HttpFetcher
from pricewatch.store import PageStore, TrackerService, extract_title, validate_url


def make_service(tmp_path, fetcher=None) -> TrackerService:
    return TrackerService(PageStore(tmp_path / "store.sqlite"), fetcher=fetcher)


def failing_fetch(url):
    raise FetchError("no route to host")


def test_add_page_with_inline_html(tmp_path, wiggle_html):
    service = make_service(tmp_path, fetcher=failing_fetch)
    page, outcome = service.add_page("https://shop.example.test/p1",
                                     inline_html=wiggle_html)
    assert outcome.code is OutcomeCode.OK
    assert str(outcome.value.amount) == "142.29"
    entries = service.history(page["id"])
    assert len(entries) == 1 and entries[0].code == "OK"
    kit = service.kit(page["id"])
    assert len(kit) == 1 and kit[0]["expression"].startswith('Wprice')
    assert page["title"] == "Asics Gel Nimbus 19 Running Shoes"


def test_add_duplicate_url_conflicts(tmp_path, wiggle_html):
    service = make_service(tmp_path, fetcher=failing_fetch)
    page, _ = service.add_page("https://shop.example.test/p1", inline_html=wiggle_html)
    with pytest.raises(DuplicateUrlError) as err:
        service.add_page("https://shop.example.test/p1", inline_html=wiggle_html)
    assert err.value.existing_id == page["id"]


def test_add_invalid_url(tmp_path):
    service = make_service(tmp_path)
    with pytest.raises(ValueError):
        service.add_page("not a url")
    with pytest.raises(ValueError):
        service.add_page("ftp://example.test/x")


def test_add_unreachable_records_unavailable(tmp_path):
    service = make_service(tmp_path, fetcher=failing_fetch)
    page, outcome = service.add_page("https://gone.example.test/x")
    assert outcome.code is OutcomeCode.PAGE_UNAVAILABLE
    entries = service.history(page["id"])
    assert [e.code for e in entries] == ["PAGE_UNAVAILABLE"]
    assert service.store.snapshot(page["id"], 0) is None


def test_find_again_uses_pattern(tmp_path, fixture_server, wiggle_html):
    fixture_server.set("/p", wiggle_html)
    service = make_service(tmp_path, fetcher=HttpFetcher(timeout=5))
    page, _ = service.add_page(fixture_server.url("/p"))
    outcome = service.find_again(page["id"])
    assert outcome.code is OutcomeCode.OK
    assert not outcome.from_scratch
    entries = service.history(page["id"])
    assert len(entries) == 2
    assert entries[0].timestamp <= entries[1].timestamp
    assert len(service.kit(page["id"])) == 1


def test_find_again_structure_change_grows_kit(tmp_path, fixture_server, wiggle_html):
    fixture_server.set("/p", wiggle_html)
    service = make_service(tmp_path, fetcher=HttpFetcher(timeout=5))
    page, _ = service.add_page(fixture_server.url("/p"))
    changed = wiggle_html.replace("Wprice", "Xprice").replace("142.29", "137.00")
    fixture_server.set("/p", changed)
    outcome = service.find_again(page["id"])
    assert outcome.code is OutcomeCode.OK
    assert outcome.from_scratch
    assert str(outcome.value.amount) == "137.00"
    kit = service.kit(page["id"])
    assert len(kit) == 2
    assert kit[0]["expression"].startswith("Wprice")  # retained
    assert kit[1]["expression"].startswith("Xprice")


def test_find_again_unknown_id(tmp_path):
    service = make_service(tmp_path)
    with pytest.raises(NotFoundError):
        service.find_again("deadbeef")


def test_find_again_page_deleted_remotely(tmp_path, fixture_server, wiggle_html):
    fixture_server.set("/p", wiggle_html)
    service = make_service(tmp_path, fetcher=HttpFetcher(timeout=5))
    page, _ = service.add_page(fixture_server.url("/p"))
    del fixture_server.routes["/p"]
    outcome = service.find_again(page["id"])
    assert outcome.code is OutcomeCode.PAGE_UNAVAILABLE
    assert [e.code for e in service.history(page["id"])] == ["OK", "PAGE_UNAVAILABLE"]


def test_list_pages(tmp_path, wiggle_html):
    service = make_service(tmp_path, fetcher=failing_fetch)
    assert service.list_pages() == []
    service.add_page("https://a.example.test/1", inline_html=wiggle_html)
    service.add_page("https://b.example.test/2", inline_html="<p>empty</p>")
    pages = service.list_pages()
    assert len(pages) == 2
    assert pages[0]["latest_outcome"] == "OK"
    assert pages[0]["latest_value"]["amount"] == "142.29"
    assert pages[1]["latest_outcome"] == "NO_PRICE"
    assert pages[1]["latest_value"] is None
    assert all(p["checked_at"] for p in pages)


def test_persistence_across_reopen(tmp_path, wiggle_html):
    path = tmp_path / "store.sqlite"
    service = TrackerService(PageStore(path), fetcher=failing_fetch)
    page, _ = service.add_page("https://a.example.test/1", inline_html=wiggle_html)
    reopened = TrackerService(PageStore(path), fetcher=failing_fetch)
    entries = reopened.history(page["id"])
    assert len(entries) == 1 and entries[0].code == "OK"
    assert len(reopened.kit(page["id"])) == 1


def test_snapshot_replay_reproduces_outcome(tmp_path, fixture_server, wiggle_html):
    fixture_server.set("/p", wiggle_html)
    service = make_service(tmp_path, fetcher=HttpFetcher(timeout=5))
    page, _ = service.add_page(fixture_server.url("/p"))
    service.find_again(page["id"])
    changed = wiggle_html.replace("Wprice", "Xprice").replace("142.29", "137.00")
    fixture_server.set("/p", changed)
    service.find_again(page["id"])
    for entry in service.history(page["id"]):
        replayed = service.replay(page["id"], entry.seq)
        assert replayed is not None
        assert replayed.code.value == entry.code
        assert replayed.value == entry.value
        assert replayed.from_scratch == entry.from_scratch


def test_concurrent_find_again_serializes(tmp_path, fixture_server, wiggle_html):
    fixture_server.set("/p", wiggle_html)
    service = make_service(tmp_path, fetcher=HttpFetcher(timeout=5))
    page, _ = service.add_page(fixture_server.url("/p"))
    errors = []

    def worker():
        try:
            service.find_again(page["id"])
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=worker) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    entries = service.history(page["id"])
    assert len(entries) == 3
    assert len(service.kit(page["id"])) == 1  # both runs matched the pattern


def test_fetcher_basic_and_redirect(fixture_server):
    fixture_server.set("/ok", "<p>body</p>")
    fixture_server.redirect("/moved", fixture_server.url("/ok"))
    fetch = HttpFetcher(timeout=5)
    result = fetch(fixture_server.url("/ok"))
    assert result.status == 200 and "body" in result.html
    result = fetch(fixture_server.url("/moved"))
    assert result.status == 200 and "body" in result.html
    result = fetch(fixture_server.url("/missing"))
    assert result.status == 404


def test_fetcher_network_error_raises():
    with pytest.raises(FetchError):
        HttpFetcher(timeout=0.3)("http://127.0.0.1:9/nothing-listens-here")


def test_fetcher_truncates_oversized_bodies(fixture_server):
    fixture_server.set("/big", "x" * 4096)
    fetch = HttpFetcher(timeout=5, max_bytes=1024)
    result = fetch(fixture_server.url("/big"))
    assert result.truncated
    assert len(result.html) == 1024
    small = fetch(fixture_server.url("/big").replace("/big", "/missing"))
    assert not small.truncated


def test_validate_url_and_title():
    assert validate_url("https://x.test/a") == "https://x.test/a"
    with pytest.raises(ValueError):
        validate_url("file:///etc/passwd")
    assert extract_title("<html><title>A  B\n C</title></html>") == "A B C"
    assert extract_title("<html><body>x</body></html>") is None

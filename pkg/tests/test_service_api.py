import pytest
from fastapi.testclient import TestClient

from pricewatch.errors import FetchError
from pricewatch.fetch import HttpFetcher
from pricewatch.service import create_app
from pricewatch.store import PageStore, TrackerService


def failing_fetch(url):
    raise FetchError("offline")


@pytest.fixture
def client(tmp_path):
    service = TrackerService(PageStore(tmp_path / "api.sqlite"), fetcher=failing_fetch)
    return TestClient(create_app(service))


@pytest.fixture
def live_client(tmp_path, fixture_server):
    service = TrackerService(PageStore(tmp_path / "api.sqlite"),
                             fetcher=HttpFetcher(timeout=5))
    return TestClient(create_app(service))


def test_add_page_created(client, wiggle_html):
    resp = client.post("/pages", json={"url": "https://a.test/p", "html": wiggle_html})
    assert resp.status_code == 201
    body = resp.json()
    assert body["outcome"]["code"] == "OK"
    assert body["outcome"]["value"] == {"amount": "142.29", "currency": "EUR"}
    assert body["id"]


def test_add_duplicate_conflict(client, wiggle_html):
    first = client.post("/pages", json={"url": "https://a.test/p", "html": wiggle_html})
    resp = client.post("/pages", json={"url": "https://a.test/p", "html": wiggle_html})
    assert resp.status_code == 409
    assert resp.json()["detail"]["id"] == first.json()["id"]


def test_add_invalid_url(client):
    resp = client.post("/pages", json={"url": "nonsense"})
    assert resp.status_code == 400


def test_extract_endpoint(live_client, fixture_server, wiggle_html):
    fixture_server.set("/p", wiggle_html)
    page_id = live_client.post(
        "/pages", json={"url": fixture_server.url("/p")}).json()["id"]
    resp = live_client.post(f"/pages/{page_id}/extract")
    assert resp.status_code == 200
    outcome = resp.json()["outcome"]
    assert outcome["code"] == "OK"
    assert outcome["from_scratch"] is False


def test_extract_unknown_page(client):
    assert client.post("/pages/nope/extract").status_code == 404


def test_listing_and_history_and_kit(client, wiggle_html):
    page_id = client.post(
        "/pages", json={"url": "https://a.test/p", "html": wiggle_html}).json()["id"]
    pages = client.get("/pages").json()
    assert len(pages) == 1
    assert pages[0]["id"] == page_id
    assert pages[0]["latest_outcome"] == "OK"
    assert pages[0]["latest_value"]["amount"] == "142.29"
    assert pages[0]["checked_at"]

    history = client.get(f"/pages/{page_id}/history").json()
    assert len(history) == 1
    assert history[0]["code"] == "OK"
    assert history[0]["from_scratch"] is True
    assert history[0]["value"]["amount"] == "142.29"

    kit = client.get(f"/pages/{page_id}/kit").json()
    assert len(kit) == 1
    assert "expression" in kit[0] and "created_at" in kit[0]


def test_history_unknown_page(client):
    assert client.get("/pages/nope/history").status_code == 404
    assert client.get("/pages/nope/kit").status_code == 404


def test_ui_absent_is_fine(client):
    assert client.get("/ui/").status_code == 404


def test_ui_served_when_built(tmp_path, wiggle_html):
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>pricewatch</title>")
    service = TrackerService(PageStore(tmp_path / "api.sqlite"), fetcher=failing_fetch)
    client = TestClient(create_app(service, ui_dir=ui))
    resp = client.get("/ui/")
    assert resp.status_code == 200
    assert "pricewatch" in resp.text

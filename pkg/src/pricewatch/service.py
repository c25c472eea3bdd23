"""HTTP/JSON API over the tracking service.

Endpoints:
    POST /pages {url, html?}      -> 201 {id, outcome} | 409 | 400
    POST /pages/{id}/extract      -> 200 {outcome} | 404
    GET  /pages                   -> 200 [{id, url, latest_outcome, ...}]
    GET  /pages/{id}/history      -> 200 [{timestamp, code, value?, from_scratch}]
    GET  /pages/{id}/kit          -> 200 [{expression, created_at}]

Static UI assets, when present, are served under /ui/.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .errors import DuplicateUrlError, NotFoundError
from .store import TrackerService


class AddPageRequest(BaseModel):
    url: str
    html: Optional[str] = None


def create_app(service: TrackerService, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="pricewatch", version=__version__)

    @app.post("/pages", status_code=201)
    def add_page(req: AddPageRequest):
        try:
            page, outcome = service.add_page(req.url, inline_html=req.html)
        except DuplicateUrlError as exc:
            raise HTTPException(
                status_code=409,
                detail={"error": "duplicate url", "id": exc.existing_id})
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"id": page["id"], "outcome": outcome.to_dict()}

    @app.post("/pages/{page_id}/extract")
    def extract(page_id: str):
        try:
            outcome = service.find_again(page_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail="page not found")
        return {"outcome": outcome.to_dict()}

    @app.get("/pages")
    def list_pages():
        return service.list_pages()

    @app.get("/pages/{page_id}/history")
    def history(page_id: str):
        try:
            return [entry.to_dict() for entry in service.history(page_id)]
        except NotFoundError:
            raise HTTPException(status_code=404, detail="page not found")

    @app.get("/pages/{page_id}/kit")
    def kit(page_id: str):
        try:
            return service.kit(page_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail="page not found")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

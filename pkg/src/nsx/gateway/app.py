"""FastAPI wiring for the search and annotation endpoints."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from ..sources import AllSourcesFailedError
from ..reranking import ScoringError
from .annotation import AnnotationError, SessionManager, SessionNotFound
from .config import ServiceConfig
from .service import BadQueryError, SearchService
from .store import JudgmentStore

__all__ = ["create_app"]


class SessionRequest(BaseModel):
    query: str
    engine_a: str
    engine_b: str
    seed: int | None = None
    # Test hook: forces the side assignment instead of the fair coin.
    swap: bool | None = None


class LabelRequest(BaseModel):
    side: str
    position: int = Field(ge=1)
    grade: int


def create_app(
    config: ServiceConfig,
    service: SearchService | None = None,
    store: JudgmentStore | None = None,
) -> FastAPI:
    service = service or SearchService(config)
    store = store or JudgmentStore(config.judgment_store)
    sessions = SessionManager(config, service, store)

    app = FastAPI(title="nsx gateway")
    app.state.service = service
    app.state.store = store
    app.state.sessions = sessions

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/search")
    def search(q: str = Query(default=""), k: int = Query(default=None)):
        try:
            outcome = service.search(q, k=k)
        except BadQueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except AllSourcesFailedError as exc:
            raise HTTPException(status_code=503, detail={"error": str(exc), "causes": exc.causes})
        except ScoringError as exc:
            raise HTTPException(status_code=503, detail=f"scoring failed: {exc}")
        return outcome.to_dict()

    @app.post("/annotation/session")
    def create_session(body: SessionRequest):
        try:
            session = sessions.create_session(
                body.query, body.engine_a, body.engine_b, seed=body.seed, swap_override=body.swap
            )
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (AllSourcesFailedError, ScoringError, RuntimeError) as exc:
            raise HTTPException(status_code=502, detail=f"engine fetch failed: {exc}")
        return session.client_view()

    @app.get("/annotation/{session_id}")
    def get_session(session_id: str):
        try:
            return sessions.get(session_id).client_view()
        except SessionNotFound:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.post("/annotation/{session_id}/label")
    def label(session_id: str, body: LabelRequest):
        try:
            return sessions.submit_label(session_id, body.side, body.position, body.grade)
        except SessionNotFound:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    if config.ui_dir and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app

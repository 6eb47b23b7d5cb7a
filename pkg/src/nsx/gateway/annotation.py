"""Blinded side-by-side annotation sessions.

A session pins two engines' top-10 lists for one query, assigns them to the
left/right columns by a fair coin, and records button labels. The
engine↔side mapping lives only server-side; the client payload exposes
nothing but "left" and "right". Labels resolve through the hidden mapping
into the judgment store and relabeling a position overwrites.
"""

from __future__ import annotations

import random
import uuid
from dataclasses import dataclass

from ..sources import query_fingerprint
from .config import EngineSpec, ServiceConfig
from .service import SearchResult, SearchService
from .store import JudgmentStore

__all__ = ["AnnotationError", "SessionNotFound", "AnnotationSession", "SessionManager"]

LABEL_LIMIT = 10
SIDES = ("left", "right")


class AnnotationError(ValueError):
    pass


class SessionNotFound(KeyError):
    pass


@dataclass
class AnnotationSession:
    session_id: str
    query: str
    query_id: str
    engine_a: str
    engine_b: str
    swap: bool
    list_a: list[dict]
    list_b: list[dict]
    grade_scale: str
    labels: dict[tuple[str, int], int]

    def engine_for_side(self, side: str) -> tuple[str, list[dict]]:
        if side not in SIDES:
            raise AnnotationError(f"side must be one of {SIDES}, got {side!r}")
        left = (self.engine_b, self.list_b) if self.swap else (self.engine_a, self.list_a)
        right = (self.engine_a, self.list_a) if self.swap else (self.engine_b, self.list_b)
        return left if side == "left" else right

    def client_view(self) -> dict:
        """What annotators see: sides only, never the engine mapping."""
        left_engine, left_list = self.engine_for_side("left")
        _, right_list = self.engine_for_side("right")
        labeled = len(self.labels)
        total = min(LABEL_LIMIT, len(left_list)) + min(LABEL_LIMIT, len(right_list))
        return {
            "session_id": self.session_id,
            "query": self.query,
            "grade_scale": self.grade_scale,
            "left": [_client_item(item, i, self.labels, "left") for i, item in enumerate(left_list, 1)],
            "right": [_client_item(item, i, self.labels, "right") for i, item in enumerate(right_list, 1)],
            "labeled": labeled,
            "label_total": total,
        }


def _client_item(item: dict, position: int, labels: dict, side: str) -> dict:
    return {
        "position": position,
        "doc_id": item["doc_id"],
        "title": item["title"],
        "url": item["url"],
        "display_text": item["display_text"],
        "grade": labels.get((side, position)),
    }


def _result_to_item(result: SearchResult) -> dict:
    return {
        "doc_id": result.doc_id,
        "title": result.title,
        "url": result.url,
        "display_text": result.display_text,
        "score": result.score,
    }


class SessionManager:
    """Creates sessions, resolves labels, and persists both to the store."""

    def __init__(self, config: ServiceConfig, service: SearchService, store: JudgmentStore):
        self.config = config
        self.service = service
        self.store = store
        self._sessions: dict[str, AnnotationSession] = {}
        self._replay()

    def _replay(self) -> None:
        for sid, record in self.store.sessions().items():
            self._sessions[sid] = AnnotationSession(
                session_id=sid,
                query=record["query"],
                query_id=record["query_id"],
                engine_a=record["engines"]["a"],
                engine_b=record["engines"]["b"],
                swap=record["swap"],
                list_a=record["lists"]["a"],
                list_b=record["lists"]["b"],
                grade_scale=record["grade_scale"],
                labels={},
            )
        for (sid, side, position), record in self.store.effective_labels().items():
            if sid in self._sessions:
                self._sessions[sid].labels[(side, position)] = record["grade"]

    def _fetch_engine_list(self, spec: EngineSpec, query: str) -> list[dict]:
        if spec.kind == "pipeline":
            outcome = self.service.search(query, k=LABEL_LIMIT)
            return [_result_to_item(r) for r in outcome.results]
        results = self.service.source_order(spec.source, query, k=LABEL_LIMIT)
        return [_result_to_item(r) for r in results]

    def create_session(
        self,
        query: str,
        engine_a: str,
        engine_b: str,
        seed: int | None = None,
        swap_override: bool | None = None,
    ) -> AnnotationSession:
        """Fetch both lists, flip the seeded coin, persist, return the session.

        ``swap_override`` is a test hook that bypasses the coin. Any engine
        fetch failure propagates and no session is created.
        """
        for name in (engine_a, engine_b):
            if name not in self.config.engines:
                raise AnnotationError(f"unknown engine {name!r}")
        if not query or not query.strip():
            raise AnnotationError("query must be non-empty")
        list_a = self._fetch_engine_list(self.config.engines[engine_a], query)
        list_b = self._fetch_engine_list(self.config.engines[engine_b], query)
        if swap_override is not None:
            swap = swap_override
        else:
            rng = random.Random(seed) if seed is not None else random
            swap = rng.random() < 0.5
        session = AnnotationSession(
            session_id=uuid.uuid4().hex,
            query=query,
            query_id=query_fingerprint(query),
            engine_a=engine_a,
            engine_b=engine_b,
            swap=swap,
            list_a=list_a,
            list_b=list_b,
            grade_scale=self.config.grade_scale,
            labels={},
        )
        self._sessions[session.session_id] = session
        self.store.append(
            {
                "type": "session",
                "session_id": session.session_id,
                "query": query,
                "query_id": session.query_id,
                "engines": {"a": engine_a, "b": engine_b},
                "swap": swap,
                "lists": {"a": list_a, "b": list_b},
                "grade_scale": session.grade_scale,
            }
        )
        return session

    def get(self, session_id: str) -> AnnotationSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFound(session_id) from None

    def submit_label(self, session_id: str, side: str, position: int, grade: int) -> dict:
        """Resolve a click through the hidden mapping and append the judgment."""
        session = self.get(session_id)
        engine, items = session.engine_for_side(side)
        limit = min(LABEL_LIMIT, len(items))
        if not 1 <= position <= limit:
            raise AnnotationError(f"position must be in [1, {limit}], got {position}")
        if grade not in self.config.grades:
            raise AnnotationError(f"grade must be in {self.config.grades}, got {grade}")
        doc_id = items[position - 1]["doc_id"]
        session.labels[(side, position)] = grade
        self.store.append(
            {
                "type": "label",
                "session_id": session_id,
                "side": side,
                "position": position,
                "engine": engine,
                "query_id": session.query_id,
                "doc_id": doc_id,
                "grade": grade,
            }
        )
        return {
            "session_id": session_id,
            "side": side,
            "position": position,
            "grade": grade,
            "labeled": len(session.labels),
        }

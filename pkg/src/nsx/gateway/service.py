"""Pipeline orchestration behind the web API: retrieve → rerank → highlight."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from ..highlighting import highlight_top
from ..index import Index
from ..reranking import (
    LexicalCrossScorer,
    MergeConfig,
    RankedList,
    RemoteScorer,
    Scorer,
    merge_and_rank,
)
from ..sources import (
    ExternalSource,
    LocalIndexSource,
    SearchSource,
    federated_retrieve,
)
from .config import ServiceConfig

__all__ = ["SearchService", "SearchResult", "SearchOutcome", "BadQueryError"]

_SNIPPET_FALLBACK_CHARS = 300


class BadQueryError(ValueError):
    pass


@dataclass(frozen=True)
class SearchResult:
    doc_id: str
    title: str | None
    url: str | None
    display_text: str
    source: str
    rank: int
    score: float
    highlighted: bool

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "title": self.title,
            "url": self.url,
            "display_text": self.display_text,
            "source": self.source,
            "rank": self.rank,
            "score": self.score,
            "highlighted": self.highlighted,
        }


@dataclass(frozen=True)
class SearchOutcome:
    query_id: str
    query: str
    results: tuple[SearchResult, ...]
    timings_s: dict[str, float]
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "query": self.query,
            "results": [r.to_dict() for r in self.results],
            "timings_s": self.timings_s,
            "warnings": list(self.warnings),
        }


def _fallback_display(text: str, limit: int = _SNIPPET_FALLBACK_CHARS) -> str:
    if len(text) <= limit:
        return text
    cut = text.rfind(" ", 0, limit)
    return text[: cut if cut > 0 else limit].rstrip() + "…"


class SearchService:
    """Holds the loaded index, sources, and scorer for one configuration."""

    def __init__(self, config: ServiceConfig, index: Index | None = None):
        self.config = config
        self.index = index
        if index is None and config.index_dir:
            self.index = Index.load(config.index_dir)
        self.sources: list[SearchSource] = []
        if self.index is not None:
            self.sources.append(
                LocalIndexSource(self.index, k=config.local_k, params=config.bm25, priority=0)
            )
        self.sources.extend(ExternalSource(sc) for sc in config.sources)
        if config.scorer == "lexical":
            self.scorer: Scorer = LexicalCrossScorer(params=config.bm25)
        else:
            endpoint = config.scorer.split(":", 1)[1]
            self.scorer = RemoteScorer(endpoint, timeout=config.scorer_timeout_s)
        self.merge_cfg = MergeConfig(window=config.window, shard_count=config.shard_count)

    def source_by_name(self, name: str) -> SearchSource:
        for source in self.sources:
            if source.name == name:
                return source
        raise KeyError(name)

    def search(self, query: str, k: int | None = None) -> SearchOutcome:
        """Run the full pipeline and format the top-k results.

        Raises BadQueryError for an empty query and lets
        AllSourcesFailedError propagate when no source contributed.
        """
        if not query or not query.strip():
            raise BadQueryError("query must be non-empty")
        if k is None:
            k = self.config.top_n
        if k < 1:
            raise BadQueryError("k must be >= 1")

        t0 = time.perf_counter()
        pool = federated_retrieve(query, self.sources, timeout=self.config.source_timeout_s)
        t1 = time.perf_counter()
        warnings = [f"source {name} failed: {err}" for name, err in pool.failed_sources.items()]
        warnings += [f"source {name} timed out" for name in pool.truncated_sources]
        if not pool.documents:
            return SearchOutcome(
                query_id=pool.query_id,
                query=query,
                results=(),
                timings_s={"retrieval_s": t1 - t0, "rerank_s": 0.0, "highlight_s": 0.0},
                warnings=tuple(warnings),
            )
        ranked = merge_and_rank(pool, self.scorer, self.merge_cfg)
        t2 = time.perf_counter()
        ranked = highlight_top(ranked, self.scorer, top_n=self.config.top_n)
        t3 = time.perf_counter()
        warnings += [f"highlighting failed for {doc_id}" for doc_id in ranked.highlight_failures]

        results = tuple(self._format_entry(e) for e in ranked.entries[:k])
        return SearchOutcome(
            query_id=ranked.query_id,
            query=query,
            results=results,
            timings_s={
                "retrieval_s": t1 - t0,
                "rerank_s": t2 - t1,
                "highlight_s": t3 - t2,
                "total_s": t3 - t0,
            },
            warnings=tuple(warnings),
        )

    def source_order(self, source_name: str, query: str, k: int = 10) -> list[SearchResult]:
        """One source's results in provider order (stage-1 view, no rerank)."""
        source = self.source_by_name(source_name)
        fetch = source.fetch(query, k, self.config.source_timeout_s)
        if fetch.error:
            raise RuntimeError(f"source {source_name} failed: {fetch.error}")
        results = []
        for i, doc in enumerate(fetch.documents[:k], start=1):
            display = doc.text if doc.is_snippet else _fallback_display(doc.text)
            results.append(
                SearchResult(
                    doc_id=doc.doc_id,
                    title=doc.title,
                    url=doc.url,
                    display_text=display,
                    source=doc.source,
                    rank=i,
                    # Provider order is authoritative; synthesize strictly
                    # decreasing scores so exported runs stay well-formed.
                    score=float(len(fetch.documents) - i + 1),
                    highlighted=False,
                )
            )
        return results

    @staticmethod
    def _format_entry(entry) -> SearchResult:
        doc = entry.document
        if doc.is_snippet:
            display = doc.text
            highlighted = False
        elif entry.highlights:
            display = " … ".join(s.text for s in entry.highlights)
            highlighted = True
        else:
            display = _fallback_display(doc.text)
            highlighted = False
        return SearchResult(
            doc_id=doc.doc_id,
            title=doc.title,
            url=doc.url,
            display_text=display,
            source=doc.source,
            rank=entry.rank,
            score=entry.rerank_score,
            highlighted=highlighted,
        )

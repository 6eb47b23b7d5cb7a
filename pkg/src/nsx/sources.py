"""Candidate retrieval fan-out: external source clients and pool assembly.

External providers are reached over a small request/response protocol
(POST /retrieve with {"query", "k"}), always queried concurrently, and their
snippets are used as the document content. Stage-1 scores are source-local
and never compared across sources; the pool exists to feed the reranker.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from urllib.parse import urlsplit, urlunsplit

from ._http import HttpTimeout, HttpTransportError, post_json

__all__ = [
    "LOCAL_SOURCE",
    "SourceDocument",
    "CandidatePool",
    "ExternalSourceConfig",
    "SourceFetch",
    "AllSourcesFailedError",
    "normalize_url",
    "fetch_external",
    "federated_retrieve",
]

LOCAL_SOURCE = "local_index"


@dataclass(frozen=True)
class SourceDocument:
    """A retrieved candidate with provenance.

    ``source`` is :data:`LOCAL_SOURCE` for index hits or the configured
    provider name for external results; external results always carry
    ``is_snippet=True`` because the provider snippet stands in for the page.
    """

    doc_id: str
    source: str
    title: str | None
    url: str | None
    text: str
    is_snippet: bool
    stage1_score: float

    def relabeled(self, source: str) -> "SourceDocument":
        """Copy with a different source tag (used by source-blindness checks)."""
        return SourceDocument(
            doc_id=self.doc_id,
            source=source,
            title=self.title,
            url=self.url,
            text=self.text,
            is_snippet=self.is_snippet,
            stage1_score=self.stage1_score,
        )


@dataclass
class CandidatePool:
    query_id: str
    query: str
    documents: list[SourceDocument]
    per_source_counts: dict[str, int] = field(default_factory=dict)
    truncated_sources: list[str] = field(default_factory=list)
    failed_sources: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ExternalSourceConfig:
    """One external provider endpoint speaking the /retrieve protocol."""

    name: str
    endpoint: str
    k: int = 10
    priority: int = 100

    def __post_init__(self) -> None:
        parts = urlsplit(self.endpoint)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ValueError(f"source {self.name!r}: invalid endpoint {self.endpoint!r}")


@dataclass
class SourceFetch:
    """What one source contributed for one query."""

    documents: list[SourceDocument]
    truncated: bool = False
    error: str | None = None


class AllSourcesFailedError(RuntimeError):
    def __init__(self, causes: dict[str, str]):
        detail = "; ".join(f"{name}: {cause}" for name, cause in causes.items())
        super().__init__(f"all sources failed: {detail}")
        self.causes = causes


def normalize_url(url: str) -> str:
    """Lowercase scheme/host, drop the fragment, strip trailing slashes."""
    parts = urlsplit(url)
    return urlunsplit(
        (parts.scheme.lower(), parts.netloc.lower(), parts.path.rstrip("/"), parts.query, "")
    )


def fetch_external(
    source: ExternalSourceConfig,
    query: str,
    k: int | None = None,
    timeout: float = 5.0,
) -> SourceFetch:
    """POST the query to one provider and convert its results.

    Returns at most k snippet documents with doc_ids namespaced by source
    name. A timeout yields an empty, truncated fetch; a malformed response
    marks the source failed for this query. Neither is raised — partial
    pools are acceptable.
    """
    if k is None:
        k = source.k
    url = source.endpoint.rstrip("/") + "/retrieve"
    try:
        payload = post_json(url, {"query": query, "k": k}, timeout=timeout)
    except HttpTimeout:
        return SourceFetch(documents=[], truncated=True)
    except HttpTransportError as exc:
        return SourceFetch(documents=[], error=f"transport error: {exc}")
    except ValueError as exc:
        return SourceFetch(documents=[], error=f"malformed response: {exc}")
    try:
        raw_results = payload["results"]
        documents = []
        for item in raw_results[:k]:
            text = item["snippet"]
            if not isinstance(text, str) or not text:
                raise ValueError("empty or non-string snippet")
            documents.append(
                SourceDocument(
                    doc_id=f"{source.name}:{item['id']}",
                    source=source.name,
                    title=item.get("title"),
                    url=item.get("url"),
                    text=text,
                    is_snippet=True,
                    stage1_score=float(len(raw_results) - len(documents)),
                )
            )
    except Exception as exc:  # malformed body, missing keys, bad JSON
        return SourceFetch(documents=[], error=f"malformed response: {exc}")
    return SourceFetch(documents=documents)


class SearchSource:
    """Anything federated_retrieve can query: a name, a priority, a fetch."""

    name: str
    priority: int

    def fetch(self, query: str, k: int | None, timeout: float) -> SourceFetch:
        raise NotImplementedError


class ExternalSource(SearchSource):
    def __init__(self, config: ExternalSourceConfig):
        self.config = config
        self.name = config.name
        self.priority = config.priority

    def fetch(self, query: str, k: int | None, timeout: float) -> SourceFetch:
        return fetch_external(self.config, query, k=k, timeout=timeout)


class LocalIndexSource(SearchSource):
    """Adapts the passage index to the fan-out interface."""

    def __init__(self, index, k: int = 1000, params=None, priority: int = 0):
        self.index = index
        self.name = LOCAL_SOURCE
        self.priority = priority
        self.k = k
        self.params = params

    def fetch(self, query: str, k: int | None, timeout: float) -> SourceFetch:
        from .index import bm25_search  # local import: index depends on this module

        try:
            return SourceFetch(documents=bm25_search(self.index, query, k or self.k, self.params))
        except Exception as exc:
            return SourceFetch(documents=[], error=str(exc))


def query_fingerprint(query: str) -> str:
    """Stable query_id for a query string (same text, same id, any session)."""
    import hashlib

    digest = hashlib.sha1(" ".join(query.split()).lower().encode("utf-8")).hexdigest()
    return f"q{digest[:12]}"


def federated_retrieve(
    query: str,
    sources: list[SearchSource],
    k_per_source: int | None = None,
    timeout: float = 5.0,
    query_id: str | None = None,
) -> CandidatePool:
    """Query every source concurrently and assemble one deduplicated pool.

    Sources are fanned out in parallel, so wall time tracks the slowest
    source rather than the sum. Deduplication runs in ascending priority
    order: the first occurrence of a normalized URL wins, then remaining
    doc_id collisions are dropped. A failed or timed-out source never
    affects what the others contribute; only all sources failing raises.
    """
    if not sources:
        raise ValueError("at least one source must be configured")
    if query_id is None:
        query_id = query_fingerprint(query)

    fetches: dict[str, SourceFetch] = {}
    with ThreadPoolExecutor(max_workers=len(sources)) as pool:
        futures = {
            src.name: pool.submit(src.fetch, query, k_per_source, timeout) for src in sources
        }
        for name, future in futures.items():
            try:
                fetches[name] = future.result()
            except Exception as exc:  # defensive: fetch() contracts say don't raise
                fetches[name] = SourceFetch(documents=[], error=str(exc))

    order = sorted(range(len(sources)), key=lambda i: (sources[i].priority, i))
    ordered = [sources[i] for i in order]
    documents: list[SourceDocument] = []
    seen_urls: set[str] = set()
    seen_ids: set[str] = set()
    per_source_counts: dict[str, int] = {}
    truncated: list[str] = []
    failed: dict[str, str] = {}
    for src in ordered:
        fetch = fetches[src.name]
        per_source_counts[src.name] = len(fetch.documents)
        if fetch.truncated:
            truncated.append(src.name)
        if fetch.error is not None:
            failed[src.name] = fetch.error
        for doc in fetch.documents:
            if doc.url is not None:
                norm = normalize_url(doc.url)
                if norm in seen_urls:
                    continue
                seen_urls.add(norm)
            if doc.doc_id in seen_ids:
                continue
            seen_ids.add(doc.doc_id)
            documents.append(doc)

    causes = dict(failed)
    for name in truncated:
        causes.setdefault(name, "timed out")
    if len(causes) == len(sources):
        raise AllSourcesFailedError(causes)

    return CandidatePool(
        query_id=query_id,
        query=query,
        documents=documents,
        per_source_counts=per_source_counts,
        truncated_sources=truncated,
        failed_sources=failed,
    )


def timed_retrieve(*args, **kwargs) -> tuple[CandidatePool, float]:
    """federated_retrieve plus its wall time in seconds."""
    start = time.perf_counter()
    pool = federated_retrieve(*args, **kwargs)
    return pool, time.perf_counter() - start

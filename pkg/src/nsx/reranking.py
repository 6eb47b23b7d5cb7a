"""Stage 2: cross-scoring of candidates, shard dispatch, and the global merge.

The scorer is pluggable: a deterministic lexical cross-scorer keeps the whole
pipeline testable end to end, and a remote scorer speaks the model-server
protocol (POST /score) so a real neural reranker drops in unchanged. Merging
sorts every candidate by rerank score alone — stage-1 scores and source
identity never influence the final order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Protocol, Sequence, runtime_checkable

from ._http import HttpTimeout, HttpTransportError, post_json
from .index import Bm25Params, bm25_idf, bm25_term
from .segmentation import WindowConfig, split_into_windows, tokenize_words
from .sources import CandidatePool, SourceDocument

if TYPE_CHECKING:
    from .pool import WorkerPool

__all__ = [
    "Scorer",
    "ScoringError",
    "BatchStats",
    "LexicalCrossScorer",
    "lexical_cross_score",
    "RemoteScorer",
    "remote_score",
    "ShardPlan",
    "shard_dispatch",
    "RankedEntry",
    "RankedList",
    "MergeConfig",
    "merge_and_rank",
]

DEFAULT_SHARD_COUNT = 10


class ScoringError(RuntimeError):
    """A scoring call failed. ``retryable`` errors may be re-dispatched."""

    def __init__(self, message: str, retryable: bool = True, shard_index: int | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.shard_index = shard_index


@runtime_checkable
class Scorer(Protocol):
    """Relevance scorer for one query against a batch of texts.

    Implementations must be deterministic (identical inputs give identical
    scores), order-equivariant (permuting texts permutes scores the same
    way), and safe for concurrent batches.
    """

    def score_batch(self, query: str, texts: Sequence[str]) -> list[float]:
        ...


@dataclass(frozen=True)
class BatchStats:
    """Collection statistics frozen over one batch of texts."""

    size: int
    avg_len: float
    df: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "BatchStats":
        df: dict[str, int] = {}
        total = 0
        for text in texts:
            tokens = tokenize_words(text)
            total += len(tokens)
            for tok in set(tokens):
                df[tok] = df.get(tok, 0) + 1
        avg = total / len(texts) if texts else 0.0
        return cls(size=len(texts), avg_len=avg, df=df)


class LexicalCrossScorer:
    """Deterministic stand-in for a neural cross-scorer.

    Scores each text as a BM25-style sum over unique query tokens, with idf
    and average length computed over the batch itself — self-contained, no
    index required. ``bind_batch`` freezes those statistics, making the
    bound scorer per-text independent; that is what keeps sharded scoring
    bit-identical to unsharded scoring.
    """

    name = "lexical"

    def __init__(self, params: Bm25Params | None = None, stats: BatchStats | None = None):
        self.params = params or Bm25Params()
        self.stats = stats

    def bind_batch(self, texts: Sequence[str]) -> "LexicalCrossScorer":
        return LexicalCrossScorer(params=self.params, stats=BatchStats.from_texts(texts))

    def score_batch(self, query: str, texts: Sequence[str]) -> list[float]:
        stats = self.stats if self.stats is not None else BatchStats.from_texts(texts)
        terms = sorted(set(tokenize_words(query)))
        scores = []
        for text in texts:
            tokens = tokenize_words(text)
            counts: dict[str, int] = {}
            for tok in tokens:
                counts[tok] = counts.get(tok, 0) + 1
            score = 0.0
            for term in terms:
                tf = counts.get(term, 0)
                if tf == 0:
                    continue
                idf = bm25_idf(stats.df.get(term, 0), stats.size)
                score += idf * bm25_term(tf, len(tokens), stats.avg_len, self.params)
            scores.append(score)
        return scores


def lexical_cross_score(
    query: str, texts: Sequence[str], params: Bm25Params | None = None
) -> list[float]:
    """Score ``texts`` against ``query`` with batch-local statistics."""
    return LexicalCrossScorer(params=params).score_batch(query, texts)


class RemoteScorer:
    """Client for the model-server scoring protocol (POST /score)."""

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self.name = f"remote:{endpoint}"

    def score_batch(self, query: str, texts: Sequence[str]) -> list[float]:
        return remote_score(self.endpoint, query, texts, timeout=self.timeout)


def remote_score(
    endpoint: str, query: str, texts: Sequence[str], timeout: float = 10.0
) -> list[float]:
    """Forward a scoring batch to a model server and validate the reply.

    The response must carry a numeric "scores" array of the same length as
    ``texts``; timeouts, length mismatches and non-numeric entries raise a
    retryable :class:`ScoringError`.
    """
    url = endpoint.rstrip("/") + "/score"
    try:
        payload = post_json(url, {"query": query, "texts": list(texts)}, timeout=timeout)
    except HttpTimeout as exc:
        raise ScoringError(f"scoring timed out: {exc}") from exc
    except (HttpTransportError, ValueError) as exc:
        raise ScoringError(f"scoring transport/protocol error: {exc}") from exc
    scores = payload.get("scores") if isinstance(payload, dict) else None
    if not isinstance(scores, list) or len(scores) != len(texts):
        got = len(scores) if isinstance(scores, list) else "no"
        raise ScoringError(f"score count mismatch: sent {len(texts)} texts, got {got} scores")
    out = []
    for value in scores:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ScoringError(f"non-numeric score in response: {value!r}")
        out.append(float(value))
    return out


@dataclass(frozen=True)
class ShardPlan:
    """Order-preserving partition of [0, n) into balanced index ranges."""

    shard_count: int
    shards: tuple[range, ...]

    @classmethod
    def balanced(cls, n: int, shard_count: int) -> "ShardPlan":
        if shard_count < 1:
            raise ValueError(f"shard_count must be >= 1, got {shard_count}")
        effective = min(shard_count, n)
        shards = []
        start = 0
        if effective:
            base, rem = divmod(n, effective)
            for i in range(effective):
                size = base + (1 if i < rem else 0)
                shards.append(range(start, start + size))
                start += size
        return cls(shard_count=shard_count, shards=tuple(shards))

    def sizes(self) -> list[int]:
        return [len(r) for r in self.shards]


def shard_dispatch(
    query: str,
    texts: Sequence[str],
    scorer: Scorer | None = None,
    pool: "WorkerPool | None" = None,
    shard_count: int = DEFAULT_SHARD_COUNT,
    retry_budget: int = 2,
) -> list[float]:
    """Split a scoring batch into shards, score them concurrently, reassemble.

    The result equals unsharded scoring exactly: batch-statistic scorers are
    bound over the full batch first (see ``bind_batch``), then each shard is
    scored independently and results are concatenated in input order.

    With ``pool`` set, shards are routed through the worker pool, which owns
    eviction retries; the bound scorer (when one was given) travels with each
    shard request. Without a pool, shards run on a local thread pool and
    retryable scoring errors are retried up to ``retry_budget`` attempts.
    A shard that exhausts its budget raises a ScoringError naming the shard.
    """
    if scorer is None and pool is None:
        raise ValueError("shard_dispatch needs a scorer, a pool, or both")
    texts = list(texts)
    if not texts:
        return []
    plan = ShardPlan.balanced(len(texts), shard_count)
    bound = scorer
    if scorer is not None and hasattr(scorer, "bind_batch"):
        bound = scorer.bind_batch(texts)

    if pool is not None:
        from .pool import ShardRequest

        def run_shard(i: int) -> list[float]:
            shard_texts = tuple(texts[j] for j in plan.shards[i])
            return pool.submit(
                ShardRequest(query=query, texts=shard_texts, scorer=bound, shard_index=i)
            )

    else:

        def run_shard(i: int) -> list[float]:
            shard_texts = [texts[j] for j in plan.shards[i]]
            attempts = 0
            while True:
                attempts += 1
                try:
                    return bound.score_batch(query, shard_texts)
                except ScoringError as exc:
                    if not exc.retryable or attempts >= retry_budget:
                        raise ScoringError(str(exc), retryable=False, shard_index=i) from exc

    if len(plan.shards) == 1:
        results = [run_shard(0)]
    else:
        with ThreadPoolExecutor(max_workers=len(plan.shards)) as executor:
            results = list(executor.map(run_shard, range(len(plan.shards))))
    merged: list[float] = []
    for i, shard_scores in enumerate(results):
        if len(shard_scores) != len(plan.shards[i]):
            raise ScoringError(
                f"shard {i} returned {len(shard_scores)} scores for {len(plan.shards[i])} texts",
                retryable=False,
                shard_index=i,
            )
        merged.extend(shard_scores)
    return merged


@dataclass(frozen=True)
class RankedEntry:
    document: SourceDocument
    rerank_score: float
    rank: int
    highlights: tuple = ()

    def with_highlights(self, sentences) -> "RankedEntry":
        return replace(self, highlights=tuple(sentences))


@dataclass(frozen=True)
class RankedList:
    query_id: str
    query: str
    entries: tuple[RankedEntry, ...]
    scorer_name: str
    degraded: bool = False
    highlight_failures: tuple[str, ...] = ()

    def ranking_key(self) -> str:
        """Canonical text form of the ranking alone (highlights excluded)."""
        return "\n".join(
            f"{e.rank}\t{e.document.doc_id}\t{e.rerank_score!r}" for e in self.entries
        )


@dataclass(frozen=True)
class MergeConfig:
    """How merge_and_rank scores: windowing for indexed docs, optional sharding."""

    window: WindowConfig = WindowConfig()
    shard_count: int | None = None
    fallback_to_stage1: bool = False


def merge_and_rank(
    candidates: CandidatePool,
    scorer: Scorer,
    cfg: MergeConfig | None = None,
    pool: "WorkerPool | None" = None,
) -> RankedList:
    """Merge all candidates into one list ranked purely by rerank score.

    Snippet documents are scored on their snippet; indexed documents are
    scored window by window and aggregated by maximum. All scoring texts go
    through one batch (sharded when configured) so batch-local scorer
    statistics cover the whole candidate set. Ties order by ascending
    doc_id. A scorer failure raises unless ``fallback_to_stage1`` is set, in
    which case pool order is kept and the list is flagged degraded.
    """
    if cfg is None:
        cfg = MergeConfig()
    if not candidates.documents:
        raise ValueError("candidate pool is empty")

    texts: list[str] = []
    spans: list[tuple[int, int]] = []  # per document: [start, end) into texts
    for doc in candidates.documents:
        start = len(texts)
        if doc.is_snippet:
            texts.append(doc.text)
        else:
            windows = split_into_windows(doc.doc_id, doc.text, cfg.window)
            texts.extend(p.text for p in windows)
            if not windows:
                texts.append(doc.text)
        spans.append((start, len(texts)))

    scorer_name = getattr(scorer, "name", type(scorer).__name__)
    if cfg.shard_count is not None:
        shard_count = cfg.shard_count
    else:
        shard_count = DEFAULT_SHARD_COUNT if pool is not None else 1
    try:
        scores = shard_dispatch(
            candidates.query,
            texts,
            scorer=scorer,
            pool=pool,
            shard_count=shard_count,
        )
    except ScoringError:
        if not cfg.fallback_to_stage1:
            raise
        entries = tuple(
            RankedEntry(document=doc, rerank_score=float(len(candidates.documents) - i), rank=i + 1)
            for i, doc in enumerate(candidates.documents)
        )
        return RankedList(
            query_id=candidates.query_id,
            query=candidates.query,
            entries=entries,
            scorer_name="stage1-fallback",
            degraded=True,
        )

    doc_scores = []
    for doc, (start, end) in zip(candidates.documents, spans):
        doc_scores.append((doc, max(scores[start:end])))
    doc_scores.sort(key=lambda pair: (-pair[1], pair[0].doc_id))
    entries = tuple(
        RankedEntry(document=doc, rerank_score=score, rank=i + 1)
        for i, (doc, score) in enumerate(doc_scores)
    )
    return RankedList(
        query_id=candidates.query_id,
        query=candidates.query,
        entries=entries,
        scorer_name=scorer_name,
    )

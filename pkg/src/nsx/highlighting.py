"""Stage 3: pick the most query-relevant sentences of the top-ranked documents.

The same scorer that ranked the documents scores their sentences (one batch
per document), and the two best sentences are kept, shown in document order.
Snippet documents are skipped — their text is already short enough.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from .pool import PoolUnavailableError
from .reranking import RankedList, Scorer, ScoringError, shard_dispatch
from .segmentation import Sentence, split_into_sentences

if TYPE_CHECKING:
    from .pool import WorkerPool

__all__ = ["Highlight", "highlight_top", "DEFAULT_TOP_N", "MAX_HIGHLIGHT_SENTENCES"]

DEFAULT_TOP_N = 10
MAX_HIGHLIGHT_SENTENCES = 2


@dataclass(frozen=True)
class Highlight:
    doc_id: str
    sentences: tuple[Sentence, ...]


def select_highlight_sentences(
    sentences: list[Sentence], scores: list[float], limit: int = MAX_HIGHLIGHT_SENTENCES
) -> tuple[Sentence, ...]:
    """Top ``limit`` sentences by score (ties to the earlier sentence),
    returned in document order."""
    by_score = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    chosen = sorted(by_score[:limit])
    return tuple(sentences[i] for i in chosen)


def highlight_top(
    ranked: RankedList,
    scorer: Scorer,
    top_n: int = DEFAULT_TOP_N,
    pool: "WorkerPool | None" = None,
    shard_count: int | None = None,
) -> RankedList:
    """Attach up to two highlighted sentences to each non-snippet top-N entry.

    Ranking order, scores and membership are untouched. Entries past
    ``top_n`` and snippet documents are skipped. If scoring a document's
    sentences fails, its highlights are omitted and the doc_id is recorded
    in ``highlight_failures`` — the ranking is still returned.
    """
    entries = list(ranked.entries)
    failures: list[str] = []
    for i, entry in enumerate(entries):
        if entry.rank > top_n or entry.document.is_snippet:
            continue
        sentences = split_into_sentences(entry.document.doc_id, entry.document.text)
        if not sentences:
            continue
        texts = [s.text for s in sentences]
        try:
            if pool is not None:
                scores = shard_dispatch(
                    ranked.query, texts, scorer=scorer, pool=pool,
                    shard_count=shard_count or len(texts),
                )
            else:
                scores = scorer.score_batch(ranked.query, texts)
        except (ScoringError, PoolUnavailableError):
            failures.append(entry.document.doc_id)
            continue
        entries[i] = entry.with_highlights(select_highlight_sentences(sentences, scores))
    return replace(
        ranked,
        entries=tuple(entries),
        highlight_failures=tuple(failures),
    )

"""Passage-level inverted index with Okapi BM25 scoring.

Long documents are split into overlapping word windows before indexing;
postings, lengths and document frequencies are all kept per passage, and a
document's retrieval score is the maximum over its passages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .segmentation import WindowConfig, split_into_windows, tokenize_words
from .sources import LOCAL_SOURCE, SourceDocument

__all__ = ["Bm25Params", "DuplicateDocumentError", "Index", "build_index", "bm25_search"]

_INDEX_FILE = "index.json"


class DuplicateDocumentError(ValueError):
    """Raised when a corpus stream repeats a doc_id."""

    def __init__(self, doc_id: str):
        super().__init__(f"duplicate doc_id in corpus: {doc_id!r}")
        self.doc_id = doc_id


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


def bm25_idf(df: int, n_passages: int) -> float:
    return math.log(1.0 + (n_passages - df + 0.5) / (df + 0.5))


def bm25_term(tf: int, length: int, avg_length: float, params: Bm25Params) -> float:
    if tf == 0:
        return 0.0
    rel_len = length / avg_length if avg_length > 0 else 0.0
    return tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * rel_len))


class Index:
    """Immutable after build; safe to share across threads."""

    def __init__(self) -> None:
        self.doc_ids: list[str] = []
        self.titles: list[str] = []
        self.texts: list[str] = []
        self._ordinals: dict[str, int] = {}
        # Per passage: (doc ordinal, window_index, word_offset, token length).
        self.passages: list[tuple[int, int, int, int]] = []
        self.postings: dict[str, list[tuple[int, int]]] = {}
        self.avg_passage_len: float = 0.0
        self.window = WindowConfig()

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def passage_count(self) -> int:
        return len(self.passages)

    def document_frequency(self, token: str) -> int:
        return len(self.postings.get(token, ()))

    def document(self, doc_id: str) -> tuple[str, str]:
        """Return (title, text) for a doc_id."""
        ordinal = self._ordinals[doc_id]
        return self.titles[ordinal], self.texts[ordinal]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._ordinals

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "window": {"window_size": self.window.window_size, "stride": self.window.stride},
            "doc_ids": self.doc_ids,
            "titles": self.titles,
            "texts": self.texts,
            "passages": self.passages,
            "postings": {t: p for t, p in self.postings.items()},
            "avg_passage_len": self.avg_passage_len,
        }
        path = out / _INDEX_FILE
        with path.open("w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False)
        return path

    @classmethod
    def load(cls, in_dir: str | Path) -> "Index":
        path = Path(in_dir) / _INDEX_FILE
        with path.open("r", encoding="utf-8") as fh:
            payload = json.load(fh)
        index = cls()
        index.window = WindowConfig(**payload["window"])
        index.doc_ids = payload["doc_ids"]
        index.titles = payload["titles"]
        index.texts = payload["texts"]
        index._ordinals = {d: i for i, d in enumerate(index.doc_ids)}
        index.passages = [tuple(p) for p in payload["passages"]]
        index.postings = {t: [tuple(e) for e in entries] for t, entries in payload["postings"].items()}
        index.avg_passage_len = payload["avg_passage_len"]
        return index


def build_index(
    corpus: Iterable[tuple[str, str, str]],
    cfg: WindowConfig | None = None,
) -> Index:
    """Index a stream of (doc_id, title, text) records.

    Document bodies are windowed with ``cfg`` and postings are kept per
    passage. Raises :class:`DuplicateDocumentError` on a repeated doc_id.
    """
    if cfg is None:
        cfg = WindowConfig()
    index = Index()
    index.window = cfg
    total_len = 0
    for doc_id, title, text in corpus:
        if doc_id in index._ordinals:
            raise DuplicateDocumentError(doc_id)
        ordinal = len(index.doc_ids)
        index._ordinals[doc_id] = ordinal
        index.doc_ids.append(doc_id)
        index.titles.append(title)
        index.texts.append(text)
        for passage in split_into_windows(doc_id, text, cfg):
            tokens = tokenize_words(passage.text)
            pid = len(index.passages)
            index.passages.append((ordinal, passage.window_index, passage.word_offset, len(tokens)))
            total_len += len(tokens)
            counts: dict[str, int] = {}
            for tok in tokens:
                counts[tok] = counts.get(tok, 0) + 1
            for tok, tf in counts.items():
                index.postings.setdefault(tok, []).append((pid, tf))
    index.avg_passage_len = total_len / len(index.passages) if index.passages else 0.0
    return index


def bm25_search(
    index: Index,
    query: str,
    k: int,
    params: Bm25Params | None = None,
) -> list[SourceDocument]:
    """Top-k documents for ``query`` under passage-level BM25.

    Passages are scored with idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)) and
    tf*(k1+1)/(tf + k1*(1 - b + b*len/avglen)); repeated query terms count
    once. Passage scores aggregate to the parent document by maximum. Only
    documents containing at least one query term are returned, sorted by
    descending score with ties broken by ascending doc_id.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if params is None:
        params = Bm25Params()
    terms = sorted(set(tokenize_words(query)))
    if not terms:
        return []
    n = index.passage_count
    passage_scores: dict[int, float] = {}
    for term in terms:
        entries = index.postings.get(term)
        if not entries:
            continue
        idf = bm25_idf(len(entries), n)
        for pid, tf in entries:
            length = index.passages[pid][3]
            passage_scores[pid] = passage_scores.get(pid, 0.0) + idf * bm25_term(
                tf, length, index.avg_passage_len, params
            )
    doc_scores: dict[int, float] = {}
    for pid, score in passage_scores.items():
        ordinal = index.passages[pid][0]
        if score > doc_scores.get(ordinal, float("-inf")):
            doc_scores[ordinal] = score
    ranked = sorted(doc_scores.items(), key=lambda item: (-item[1], index.doc_ids[item[0]]))
    results = []
    for ordinal, score in ranked[:k]:
        results.append(
            SourceDocument(
                doc_id=index.doc_ids[ordinal],
                source=LOCAL_SOURCE,
                title=index.titles[ordinal] or None,
                url=None,
                text=index.texts[ordinal],
                is_snippet=False,
                stage1_score=score,
            )
        )
    return results

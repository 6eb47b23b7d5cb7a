"""Deterministic word tokenization, sliding-window splitting, and sentence splitting.

These are the text primitives shared by indexing, reranking, and highlighting.
Everything here is rule-based and pure so that sharded scoring and regression
tests stay reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Maximal runs of Unicode letters/digits; underscore and everything else separate.
_WORD_RUN = re.compile(r"[^\W_]+", re.UNICODE)

# A '.', '!' or '?' ends a sentence only when followed by whitespace or end-of-text.
_SENTENCE_END = frozenset(".!?")


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window parameters, in words."""

    window_size: int = 150
    stride: int = 75

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.stride > self.window_size:
            raise ValueError(
                f"stride ({self.stride}) must not exceed window_size ({self.window_size})"
            )


@dataclass(frozen=True)
class Passage:
    """A word-window slice of a document; the unit scorers and the index see."""

    doc_id: str
    window_index: int
    word_offset: int
    text: str


@dataclass(frozen=True)
class Sentence:
    """One sentence of a document with its character span in the source text."""

    doc_id: str
    ordinal: int
    text: str
    char_span: tuple[int, int] = field(default=(0, 0))


def tokenize_words(text: str) -> list[str]:
    """Lowercase ``text`` and return its maximal alphanumeric runs, in order.

    All non-alphanumeric characters (including underscore) are separators.
    Lowercasing happens before run extraction so the result is idempotent
    under re-tokenization even when lowercasing splits a run.
    """
    if not text:
        return []
    return _WORD_RUN.findall(text.lower())


def split_into_windows(doc_id: str, text: str, cfg: WindowConfig | None = None) -> list[Passage]:
    """Split ``text`` into overlapping word windows.

    Windows start at word offsets 0, stride, 2*stride, ... and hold up to
    ``window_size`` whitespace-delimited words each (original casing and
    punctuation kept, rejoined with single spaces). Generation stops with the
    first window whose end reaches the final word, so every word is covered
    exactly once by the union of windows and no duplicate tail is emitted.
    """
    if cfg is None:
        cfg = WindowConfig()
    words = text.split()
    if not words:
        return []
    passages: list[Passage] = []
    offset = 0
    index = 0
    n = len(words)
    while True:
        end = min(offset + cfg.window_size, n)
        passages.append(
            Passage(
                doc_id=doc_id,
                window_index=index,
                word_offset=offset,
                text=" ".join(words[offset:end]),
            )
        )
        if offset + cfg.window_size >= n:
            break
        offset += cfg.stride
        index += 1
    return passages


def split_into_sentences(doc_id: str, text: str) -> list[Sentence]:
    """Split ``text`` into sentences on '.', '!' or '?' followed by whitespace.

    Trailing unterminated text forms a final sentence. Each sentence is
    trimmed of surrounding whitespace and carries the character span of the
    trimmed text, so ``text[start:end]`` reproduces it verbatim.
    """
    sentences: list[Sentence] = []
    seg_start = 0
    n = len(text)

    def emit(raw_start: int, raw_end: int) -> None:
        start, end = raw_start, raw_end
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            sentences.append(
                Sentence(
                    doc_id=doc_id,
                    ordinal=len(sentences),
                    text=text[start:end],
                    char_span=(start, end),
                )
            )

    for i, ch in enumerate(text):
        if ch in _SENTENCE_END and (i + 1 == n or text[i + 1].isspace()):
            emit(seg_start, i + 1)
            seg_start = i + 1
    emit(seg_start, n)
    return sentences

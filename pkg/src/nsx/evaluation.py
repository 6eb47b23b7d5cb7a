"""Ranked-retrieval effectiveness metrics over standard run/qrels files.

Run lines are `qid Q0 docid rank score tag`; qrels lines are
`qid 0 docid grade` with grades in {0, 1, 2} (non-relevant / on-topic /
relevant). Binary metrics binarize at grade >= 1 by default. nDCG uses
linear gain grade/log2(i+1) by default, exponential gain (2^grade - 1)
behind a flag. Unjudged documents count as grade 0, and the mean of each
metric is taken over queries present in both the run and the qrels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

__all__ = [
    "Judgment",
    "RunEntry",
    "MetricReport",
    "FormatError",
    "UnknownMetricError",
    "parse_run",
    "parse_qrels",
    "parse_metric",
    "evaluate",
]

GRADE_SCALE = (0, 1, 2)
SUPPORTED_METRICS = ("mrr", "ndcg", "map", "p", "r")


class FormatError(ValueError):
    """Malformed or invalid run/qrels content, with the offending line."""

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class UnknownMetricError(ValueError):
    def __init__(self, name: str):
        super().__init__(
            f"unknown metric {name!r}; supported: mrr@k, ndcg@k, p@k, r@k, map"
        )


@dataclass(frozen=True)
class Judgment:
    query_id: str
    doc_id: str
    grade: int


@dataclass(frozen=True)
class RunEntry:
    query_id: str
    doc_id: str
    rank: int
    score: float
    run_tag: str


@dataclass(frozen=True)
class MetricReport:
    """Per-query and mean metric values, keyed by the requested metric names."""

    per_query: dict[str, dict[str, float]]
    means: dict[str, float]
    query_count: int

    def table(self) -> str:
        """Plain fixed-width table of the means."""
        lines = [f"{'metric':<10} {'mean':>10}   (queries: {self.query_count})"]
        for name, value in self.means.items():
            lines.append(f"{name:<10} {value:>10.4f}")
        return "\n".join(lines)


def _lines(source: str | Path | TextIO) -> tuple[str, Iterable[tuple[int, str]]]:
    if isinstance(source, (str, Path)):
        path = str(source)
        text = Path(source).read_text(encoding="utf-8")
    else:
        path = getattr(source, "name", "<stream>")
        text = source.read()
    return path, list(enumerate(text.splitlines(), start=1))


def parse_run(source: str | Path | TextIO) -> list[RunEntry]:
    """Parse and validate a run file.

    Enforces, per query: unique doc_ids, ranks consecutive from 1, and
    scores non-increasing with rank. Raises FormatError with the line number
    of the first violation.
    """
    path, lines = _lines(source)
    entries: list[RunEntry] = []
    seen: dict[tuple[str, str], int] = {}
    last_rank: dict[str, int] = {}
    last_score: dict[str, float] = {}
    for line_no, raw in lines:
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 6:
            raise FormatError(path, line_no, f"expected 6 fields, got {len(parts)}")
        qid, _, doc_id, rank_s, score_s, tag = parts
        try:
            rank = int(rank_s)
            score = float(score_s)
        except ValueError as exc:
            raise FormatError(path, line_no, f"bad rank/score: {exc}") from None
        if (qid, doc_id) in seen:
            raise FormatError(
                path, line_no, f"duplicate document {doc_id!r} for query {qid!r} "
                f"(first at line {seen[(qid, doc_id)]})"
            )
        seen[(qid, doc_id)] = line_no
        expected = last_rank.get(qid, 0) + 1
        if rank != expected:
            raise FormatError(path, line_no, f"rank {rank} for query {qid!r}, expected {expected}")
        if qid in last_score and score > last_score[qid]:
            raise FormatError(
                path, line_no, f"score {score} increases over previous {last_score[qid]}"
            )
        last_rank[qid] = rank
        last_score[qid] = score
        entries.append(RunEntry(qid, doc_id, rank, score, tag))
    return entries


def parse_qrels(source: str | Path | TextIO) -> list[Judgment]:
    """Parse a qrels file; one grade per (query, document), grades in {0,1,2}."""
    path, lines = _lines(source)
    judgments: list[Judgment] = []
    seen: dict[tuple[str, str], int] = {}
    for line_no, raw in lines:
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 4:
            raise FormatError(path, line_no, f"expected 4 fields, got {len(parts)}")
        qid, _, doc_id, grade_s = parts
        try:
            grade = int(grade_s)
        except ValueError:
            raise FormatError(path, line_no, f"bad grade {grade_s!r}") from None
        if grade not in GRADE_SCALE:
            raise FormatError(path, line_no, f"grade {grade} outside scale {GRADE_SCALE}")
        if (qid, doc_id) in seen:
            raise FormatError(
                path, line_no,
                f"duplicate judgment for ({qid!r}, {doc_id!r}), first at line {seen[(qid, doc_id)]}"
            )
        seen[(qid, doc_id)] = line_no
        judgments.append(Judgment(qid, doc_id, grade))
    return judgments


def parse_metric(name: str) -> tuple[str, int | None]:
    """Split 'ndcg@20' into ('ndcg', 20); 'map' has no cutoff."""
    base, _, cutoff_s = name.lower().partition("@")
    if base not in SUPPORTED_METRICS:
        raise UnknownMetricError(name)
    if base == "map":
        if cutoff_s:
            raise UnknownMetricError(name)
        return base, None
    if not cutoff_s:
        raise UnknownMetricError(name)
    try:
        cutoff = int(cutoff_s)
    except ValueError:
        raise UnknownMetricError(name) from None
    if cutoff < 1:
        raise UnknownMetricError(name)
    return base, cutoff


def _gain(grade: int, exponential: bool) -> float:
    return float(2**grade - 1) if exponential else float(grade)


def _query_metric(
    base: str,
    cutoff: int | None,
    ranked_grades: list[int],
    all_grades: list[int],
    threshold: int,
    exponential_gain: bool,
) -> float:
    """One metric for one query.

    ``ranked_grades``: grades of the run's documents in rank order (unjudged
    as 0). ``all_grades``: grades of every judged document for the query.
    """
    if base == "mrr":
        for i, grade in enumerate(ranked_grades[:cutoff], start=1):
            if grade >= threshold:
                return 1.0 / i
        return 0.0
    if base == "p":
        hits = sum(1 for g in ranked_grades[:cutoff] if g >= threshold)
        return hits / cutoff
    if base == "r":
        total_relevant = sum(1 for g in all_grades if g >= threshold)
        if total_relevant == 0:
            return 0.0
        hits = sum(1 for g in ranked_grades[:cutoff] if g >= threshold)
        return hits / total_relevant
    if base == "map":
        total_relevant = sum(1 for g in all_grades if g >= threshold)
        if total_relevant == 0:
            return 0.0
        hits = 0
        precision_sum = 0.0
        for i, grade in enumerate(ranked_grades, start=1):
            if grade >= threshold:
                hits += 1
                precision_sum += hits / i
        return precision_sum / total_relevant
    if base == "ndcg":
        dcg = sum(
            _gain(g, exponential_gain) / math.log2(i + 1)
            for i, g in enumerate(ranked_grades[:cutoff], start=1)
        )
        ideal = sorted(all_grades, reverse=True)[:cutoff]
        idcg = sum(
            _gain(g, exponential_gain) / math.log2(i + 1) for i, g in enumerate(ideal, start=1)
        )
        return dcg / idcg if idcg > 0 else 0.0
    raise UnknownMetricError(base)


def evaluate(
    run: list[RunEntry],
    qrels: list[Judgment],
    metrics: list[str],
    binarization_threshold: int = 1,
    exponential_gain: bool = False,
) -> MetricReport:
    """Compute the requested metrics for a run against graded judgments.

    Queries present in both run and qrels are evaluated; the mean is the
    arithmetic mean over those queries (0.0 when there are none). Binary
    metrics (mrr/p/r/map) treat grade >= ``binarization_threshold`` as
    relevant; queries with no relevant judged document contribute 0 to them.
    """
    parsed = [(name, *parse_metric(name)) for name in metrics]

    by_query: dict[str, list[RunEntry]] = {}
    for entry in run:
        by_query.setdefault(entry.query_id, []).append(entry)
    grades: dict[str, dict[str, int]] = {}
    for j in qrels:
        grades.setdefault(j.query_id, {})[j.doc_id] = j.grade

    evaluated = sorted(set(by_query) & set(grades))
    per_query: dict[str, dict[str, float]] = {name: {} for name, _, _ in parsed}
    for qid in evaluated:
        entries = sorted(by_query[qid], key=lambda e: e.rank)
        judged = grades[qid]
        ranked_grades = [judged.get(e.doc_id, 0) for e in entries]
        all_grades = list(judged.values())
        for name, base, cutoff in parsed:
            per_query[name][qid] = _query_metric(
                base, cutoff, ranked_grades, all_grades, binarization_threshold, exponential_gain
            )

    means = {
        name: (sum(values.values()) / len(values) if values else 0.0)
        for name, values in per_query.items()
    }
    return MetricReport(per_query=per_query, means=means, query_count=len(evaluated))


def write_run(entries: list[RunEntry], path: str | Path) -> None:
    """Write run entries in standard line format, grouped by query."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for e in sorted(entries, key=lambda e: (e.query_id, e.rank)):
            fh.write(f"{e.query_id} Q0 {e.doc_id} {e.rank} {e.score:.6f} {e.run_tag}\n")


def write_qrels(judgments: list[Judgment], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for j in sorted(judgments, key=lambda j: (j.query_id, j.doc_id)):
            fh.write(f"{j.query_id} 0 {j.doc_id} {j.grade}\n")

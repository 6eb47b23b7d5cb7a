"""Append-oriented judgment and session log.

One JSONL file holds both session records and label records, so annotation
state survives restarts and exports trivially. Appends are serialized under
a lock and flushed per record; relabeling appends a new record and the last
one wins. ``compact`` rewrites the file with only sessions and effective
labels.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from ..evaluation import Judgment, RunEntry

__all__ = ["JudgmentStore"]


class JudgmentStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def records(self) -> list[dict]:
        with self._lock:
            text = self.path.read_text(encoding="utf-8")
        return [json.loads(line) for line in text.splitlines() if line.strip()]

    def sessions(self) -> dict[str, dict]:
        return {r["session_id"]: r for r in self.records() if r.get("type") == "session"}

    def effective_labels(self) -> dict[tuple[str, str, int], dict]:
        """Last label record per (session, side, position)."""
        labels: dict[tuple[str, str, int], dict] = {}
        for record in self.records():
            if record.get("type") == "label":
                labels[(record["session_id"], record["side"], record["position"])] = record
        return labels

    def export_qrels(self, engine: str) -> list[Judgment]:
        """Effective labels for one engine as judgments.

        If the same (query, document) was labeled in several sessions, the
        latest label in log order wins. Unlabeled positions are absent.
        """
        by_key: dict[tuple[str, str], int] = {}
        for record in self.effective_labels().values():
            if record["engine"] == engine:
                by_key[(record["query_id"], record["doc_id"])] = record["grade"]
        return [Judgment(qid, doc_id, grade) for (qid, doc_id), grade in sorted(by_key.items())]

    def export_run(self, engine: str) -> list[RunEntry]:
        """Each query's latest session list for one engine, as run entries."""
        latest: dict[str, dict] = {}
        for session in self.sessions().values():
            for eng_key in ("a", "b"):
                if session["engines"][eng_key] == engine:
                    latest[session["query_id"]] = {"session": session, "key": eng_key}
        entries: list[RunEntry] = []
        for query_id, hit in sorted(latest.items()):
            items = hit["session"]["lists"][hit["key"]]
            for i, item in enumerate(items, start=1):
                entries.append(
                    RunEntry(
                        query_id=query_id,
                        doc_id=item["doc_id"],
                        rank=i,
                        score=float(item["score"]),
                        run_tag=engine,
                    )
                )
        return entries

    def engines(self) -> list[str]:
        names = set()
        for session in self.sessions().values():
            names.update(session["engines"].values())
        return sorted(names)

    def compact(self) -> int:
        """Rewrite the log keeping sessions plus effective labels.

        Returns the number of records dropped.
        """
        with self._lock:
            text = self.path.read_text(encoding="utf-8")
            records = [json.loads(line) for line in text.splitlines() if line.strip()]
            labels: dict[tuple[str, str, int], dict] = {}
            kept: list[dict] = []
            for record in records:
                if record.get("type") == "label":
                    labels[(record["session_id"], record["side"], record["position"])] = record
                else:
                    kept.append(record)
            kept.extend(labels.values())
            with self.path.open("w", encoding="utf-8") as fh:
                for record in kept:
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return len(records) - len(kept)

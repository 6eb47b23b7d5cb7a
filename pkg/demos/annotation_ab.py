"""Blinded A/B annotation, end to end: create a session comparing the full
pipeline against raw provider order, label both columns, export, evaluate.

Run: python demos/annotation_ab.py
"""

import tempfile
from pathlib import Path

from nsx.evaluation import evaluate, parse_qrels, parse_run, write_qrels, write_run
from nsx.gateway import JudgmentStore, SearchService, ServiceConfig, SessionManager
from nsx.gateway.config import EngineSpec
from nsx.index import build_index
from nsx.sources import ExternalSourceConfig
from nsx.stubserver import StubServer

CORPUS = [
    (f"case{i:02d}", f"Ruling {i}",
     f"The appellate court ruling {i} covers contract law. Damages were awarded in case {i}. "
     f"Counsel cited precedent {i} throughout.")
    for i in range(12)
]

WEB = [
    {"id": f"w{i}", "title": f"Law blog {i}", "url": f"http://blog.example/{i}",
     "snippet": f"Commentary {i} on contract law rulings and damages."}
    for i in range(10)
]


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        index = build_index(CORPUS)
        index.save(Path(tmp) / "idx")
        with StubServer(results=WEB) as web:
            config = ServiceConfig(
                index_dir=str(Path(tmp) / "idx"),
                sources=[ExternalSourceConfig(name="webstub", endpoint=web.url)],
                judgment_store=str(Path(tmp) / "labels.jsonl"),
                engines={
                    "ranked": EngineSpec(name="ranked", kind="pipeline"),
                    "raw_web": EngineSpec(name="raw_web", kind="source_order", source="webstub"),
                },
            )
            service = SearchService(config)
            store = JudgmentStore(config.judgment_store)
            manager = SessionManager(config, service, store)

            session = manager.create_session("contract law damages", "ranked", "raw_web", seed=3)
            view = session.client_view()
            print(f"session {view['session_id'][:8]}…  columns are blinded: {list(view)}")
            print(f"left[1]:  {view['left'][0]['display_text'][:70]}…")
            print(f"right[1]: {view['right'][0]['display_text'][:70]}…")

            # an annotator clicks grades down both columns
            for side in ("left", "right"):
                for position in range(1, len(view[side]) + 1):
                    grade = 2 if position <= 3 else (1 if position <= 6 else 0)
                    manager.submit_label(session.session_id, side, position, grade)
            print(f"labeled {len(session.labels)} positions")

        for engine in ("ranked", "raw_web"):
            run_path = Path(tmp) / f"{engine}.run"
            qrels_path = Path(tmp) / f"{engine}.qrels"
            write_run(store.export_run(engine), run_path)
            write_qrels(store.export_qrels(engine), qrels_path)
            report = evaluate(parse_run(run_path), parse_qrels(qrels_path), ["ndcg@10", "p@10"])
            print(f"{engine:>8}: nDCG@10 {report.means['ndcg@10']:.4f}  P@10 {report.means['p@10']:.4f}")


if __name__ == "__main__":
    main()

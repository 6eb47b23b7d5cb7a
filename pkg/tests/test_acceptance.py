"""Acceptance gate: one test per top-level criterion, run with

    pytest tests/test_acceptance.py -v -s

Each test prints a single PASS line once its criterion holds at the stated
tolerance. Oracles here are deliberately independent re-implementations
(explicit loops, no shared code paths with the package internals).
"""

import io
import json
import math
import random
import re
import time
from contextlib import redirect_stdout
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from nsx.cli import main as cli_main
from nsx.evaluation import evaluate, parse_qrels, parse_run, write_qrels, write_run
from nsx.gateway import JudgmentStore, SearchService, ServiceConfig, SessionManager, create_app
from nsx.gateway.config import EngineSpec
from nsx.highlighting import highlight_top
from nsx.index import Bm25Params, build_index, bm25_search
from nsx.loadtest import LoadTestConfig, percentile_nearest_rank, run_loadtest
from nsx.pool import FleetSimConfig, Worker, WorkerEvicted, WorkerPool, simulate_fleet
from nsx.reranking import LexicalCrossScorer, merge_and_rank, shard_dispatch
from nsx.segmentation import WindowConfig, split_into_sentences, split_into_windows
from nsx.sources import CandidatePool, ExternalSource, ExternalSourceConfig, SourceDocument
from nsx.stubserver import StubServer
from tests.corpusgen import write_corpus_tsv

DATA_DIR = Path(__file__).parent / "data"


def ok(name):
    print(f"\nACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------- windowing

def test_windowing_properties_and_worked_examples():
    started = time.perf_counter()
    rng = random.Random(101)
    for case in range(1000):
        n = rng.randint(0, 500)
        window = rng.randint(1, 60)
        stride = rng.randint(1, window)
        cfg = WindowConfig(window, stride)
        text = " ".join(f"w{i}" for i in range(n))
        passages = split_into_windows("d", text, cfg)
        covered = set()
        for p in passages:
            size = len(p.text.split())
            assert p.word_offset == p.window_index * stride
            covered.update(range(p.word_offset, p.word_offset + size))
        assert covered == set(range(n)), f"coverage failed on case {case}"
        for a, b in zip(passages, passages[1:]):
            if len(a.text.split()) == window and len(b.text.split()) == window:
                overlap = a.word_offset + window - b.word_offset
                assert overlap == window - stride

    for n_words, expected in ((300, [(0, 0), (1, 75), (2, 150)]), (100, [(0, 0)])):
        text = " ".join(f"w{i}" for i in range(n_words))
        got = [(p.window_index, p.word_offset) for p in split_into_windows("d", text)]
        assert got == expected
    passages = split_into_windows("d", " ".join(f"w{i}" for i in range(151)))
    assert [(p.word_offset, len(p.text.split())) for p in passages] == [(0, 150), (75, 76)]

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"windowing property suite took {elapsed:.2f}s (budget 5s)"
    ok("windowing (1000 random cases + worked examples)")


# --------------------------------------------------------------- bm25 oracle

def test_bm25_matches_brute_force_oracle():
    def brute_force(corpus, query, params, cfg):
        toks = lambda t: re.findall(r"[^\W_]+", t.lower())
        passages = []
        for doc_id, _, text in corpus:
            words = text.split()
            offset = 0
            while words:
                chunk = words[offset:offset + cfg.window_size]
                passages.append((doc_id, toks(" ".join(chunk))))
                if offset + cfg.window_size >= len(words):
                    break
                offset += cfg.stride
        n = len(passages)
        avg = sum(len(p[1]) for p in passages) / n if n else 0.0
        best = {}
        for doc_id, tokens in passages:
            score = 0.0
            for term in set(toks(query)):
                tf = tokens.count(term)
                if tf == 0:
                    continue
                df = sum(1 for _, other in passages if term in other)
                idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
                score += idf * tf * (params.k1 + 1) / (
                    tf + params.k1 * (1 - params.b + params.b * len(tokens) / avg))
            if score > 0 and score > best.get(doc_id, -1.0):
                best[doc_id] = score
        return best

    rng = random.Random(202)
    vocab = [f"v{i}" for i in range(40)]
    params = Bm25Params()
    cfg = WindowConfig(10, 5)
    checked = 0
    for _ in range(30):
        corpus = [
            (f"doc{d:02d}", "", " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 40))))
            for d in range(rng.randint(1, 50))
        ]
        index = build_index(corpus, cfg)
        query = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 3)))
        expected = brute_force(corpus, query, params, cfg)
        got = bm25_search(index, query, k=len(corpus), params=params)
        assert {d.doc_id for d in got} == set(expected)
        for doc in got:
            assert abs(doc.stage1_score - expected[doc.doc_id]) <= 1e-9 * abs(expected[doc.doc_id])
            checked += 1

    toy = build_index([("d1", "", "law court judge"), ("d2", "", "cat dog bird")])
    assert bm25_search(toy, "law", 1)[0].stage1_score == math.log(2)
    ok(f"bm25 oracle ({checked} scored docs within 1e-9 relative; ln2 toy exact)")


# ---------------------------------------------------------- shard equivalence

def test_shard_equivalence_with_and_without_eviction():
    class EvictOnce(Worker):
        def __init__(self, worker_id, scorer=None):
            super().__init__(worker_id, scorer=scorer)
            self.tripped = False

        def execute(self, request):
            if not self.tripped:
                self.tripped = True
                raise WorkerEvicted(self.id)
            return super().execute(request)

    rng = random.Random(303)
    words = ["law", "court", "judge", "cat", "dog", "tree", "river", "stone"]
    scorer = LexicalCrossScorer()
    for case in range(200):
        n = rng.randint(1, 30)
        texts = [" ".join(rng.choice(words) for _ in range(rng.randint(1, 12))) for _ in range(n)]
        query = " ".join(rng.choice(words) for _ in range(rng.randint(1, 3)))
        k = rng.randint(1, n)
        expected = scorer.score_batch(query, texts)

        assert shard_dispatch(query, texts, scorer=scorer, shard_count=k) == expected

        pool = WorkerPool([EvictOnce("flaky"), Worker("w1"), Worker("w2")])
        got = shard_dispatch(query, texts, scorer=scorer, pool=pool, shard_count=k)
        assert got == expected, f"eviction changed scores in case {case}"
    ok("shard equivalence (200 random cases, exact, incl. mid-shard eviction)")


# ------------------------------------------------------- merge source-blindness

def test_merge_is_blind_to_source_labels():
    rng = random.Random(404)
    words = ["law", "court", "judge", "cat", "dog", "tree", "river"]
    labels = ["s1", "s2", "s3", "s4"]
    for case in range(100):
        docs = [
            SourceDocument(
                doc_id=f"d{i:02d}", source=rng.choice(labels), title=None, url=None,
                text=" ".join(rng.choice(words) for _ in range(rng.randint(1, 10))),
                is_snippet=True, stage1_score=rng.random() * 100,
            )
            for i in range(rng.randint(1, 15))
        ]
        query = " ".join(rng.choice(words) for _ in range(2))
        pool = CandidatePool(query_id="q", query=query, documents=docs)
        base = [e.document.doc_id for e in merge_and_rank(pool, LexicalCrossScorer()).entries]
        relabeled = [d.relabeled(rng.choice(labels)) for d in docs]
        pool2 = CandidatePool(query_id="q", query=query, documents=relabeled)
        got = [e.document.doc_id for e in merge_and_rank(pool2, LexicalCrossScorer()).entries]
        assert got == base, f"source relabeling changed ranking in case {case}"
    ok("merge source-blindness (100 random pools)")


# ---------------------------------------------------------------- highlighting

def test_highlighting_counts_and_ranking_stability():
    rng = random.Random(505)
    sentence_bank = [
        "The law is firm here", "Courts hear the law", "A cat sleeps",
        "Judges rule on law", "Rivers flow past", "The court adjourned",
    ]
    docs = []
    sentence_counts = {}
    for i in range(14):
        is_snippet = i % 3 == 0
        n_sentences = rng.randint(1, 5)
        text = ". ".join(rng.choice(sentence_bank) for _ in range(n_sentences)) + "."
        doc_id = f"d{i:02d}"
        sentence_counts[doc_id] = len(split_into_sentences(doc_id, text))
        docs.append(SourceDocument(
            doc_id=doc_id, source="web" if is_snippet else "local_index", title=None,
            url=None, text=text, is_snippet=is_snippet, stage1_score=1.0,
        ))
    pool = CandidatePool(query_id="q", query="law court", documents=docs)
    ranked = merge_and_rank(pool, LexicalCrossScorer())
    before = ranked.ranking_key().encode("utf-8")
    highlighted = highlight_top(ranked, LexicalCrossScorer(), top_n=10)
    after = highlighted.ranking_key().encode("utf-8")
    assert before == after, "ranking changed byte-wise during highlighting"
    for entry in highlighted.entries:
        doc = entry.document
        if entry.rank > 10 or doc.is_snippet:
            assert entry.highlights == ()
        else:
            assert len(entry.highlights) == min(2, sentence_counts[doc.doc_id])
    ok("highlighting (min(2, sentences) per top-10 doc, snippets skipped, ranking byte-identical)")


# -------------------------------------------------------------- metrics oracle

def test_metrics_match_brute_force_to_1e12():
    def bf(docs, judged, k):
        mrr = 0.0
        for pos, doc in enumerate(docs[:k], 1):
            if judged.get(doc, 0) >= 1:
                mrr = 1.0 / pos
                break
        p = sum(1 for d in docs[:k] if judged.get(d, 0) >= 1) / k
        total_rel = sum(1 for g in judged.values() if g >= 1)
        r = (sum(1 for d in docs[:k] if judged.get(d, 0) >= 1) / total_rel) if total_rel else 0.0
        hits, ap_sum = 0, 0.0
        for pos, doc in enumerate(docs, 1):
            if judged.get(doc, 0) >= 1:
                hits += 1
                ap_sum += hits / pos
        ap = ap_sum / total_rel if total_rel else 0.0
        dcg = sum(judged.get(d, 0) / math.log2(pos + 1) for pos, d in enumerate(docs[:k], 1))
        idcg = sum(g / math.log2(pos + 1)
                   for pos, g in enumerate(sorted(judged.values(), reverse=True)[:k], 1))
        ndcg = dcg / idcg if idcg > 0 else 0.0
        return mrr, p, r, ap, ndcg

    rng = random.Random(606)
    instances = 0
    for _ in range(500):
        n = rng.randint(1, 8)
        docs = [f"d{i}" for i in range(n)]
        rng.shuffle(docs)
        judged = {d: rng.choice([0, 1, 2]) for d in docs if rng.random() < 0.85}
        if not judged:
            continue
        k = rng.randint(1, 8)
        run = [
            (f"q Q0 {doc} {pos} {float(n - pos)} t") for pos, doc in enumerate(docs, 1)
        ]
        entries = parse_run(io.StringIO("\n".join(run)))
        qrels = parse_qrels(io.StringIO("\n".join(f"q 0 {d} {g}" for d, g in judged.items())))
        report = evaluate(entries, qrels, [f"mrr@{k}", f"p@{k}", f"r@{k}", "map", f"ndcg@{k}"])
        mrr, p, r, ap, ndcg = bf(docs, judged, k)
        assert abs(report.means[f"mrr@{k}"] - mrr) <= 1e-12
        assert abs(report.means[f"p@{k}"] - p) <= 1e-12
        assert abs(report.means[f"r@{k}"] - r) <= 1e-12
        assert abs(report.means["map"] - ap) <= 1e-12
        assert abs(report.means[f"ndcg@{k}"] - ndcg) <= 1e-12
        instances += 1

    # worked values
    run = parse_run(io.StringIO("q Q0 x 1 3 t\nq Q0 y 2 2 t\nq Q0 z 3 1 t"))
    qrels = parse_qrels(io.StringIO("q 0 x 2\nq 0 y 0\nq 0 z 1"))
    assert evaluate(run, qrels, ["ndcg@3"]).means["ndcg@3"] == pytest.approx(0.9503, abs=1e-4)
    run = parse_run(io.StringIO("q Q0 a 1 3 t\nq Q0 b 2 2 t\nq Q0 c 3 1 t"))
    qrels = parse_qrels(io.StringIO("q 0 a 1\nq 0 c 1"))
    assert evaluate(run, qrels, ["map"]).means["map"] == pytest.approx(0.8333, abs=1e-4)
    ok(f"metrics oracle ({instances} random instances within 1e-12; worked values reproduced)")


# ------------------------------------------------------------------- load test

def test_loadtest_qps_determinism_and_p90():
    started = time.perf_counter()
    with StubServer() as server:
        target = server.url + "/search"
        qps_run = run_loadtest(LoadTestConfig(
            target=target, users=1, duration_s=60.0, query_set=("alpha", "beta", "gamma"),
            think_min_s=1.0, think_max_s=1.0, seed=42,
        ))
        assert 0.95 <= qps_run.qps <= 1.05, f"QPS {qps_run.qps} outside [0.95, 1.05]"

        short = dict(target=target, users=2, duration_s=8.0, query_set=("a", "b", "c", "d"),
                     think_min_s=0.25, think_max_s=0.75, seed=9)
        first = run_loadtest(LoadTestConfig(**short))
        second = run_loadtest(LoadTestConfig(**short))
        assert first.request_count == second.request_count
        assert first.query_sequences == second.query_sequences

    latencies = list(qps_run.latencies_s)
    ordered = sorted(latencies)
    rank = -(-90 * len(ordered) // 100)
    assert qps_run.latency_p90_s == ordered[rank - 1]
    assert qps_run.latency_min_s <= qps_run.latency_p90_s <= qps_run.latency_max_s

    elapsed = time.perf_counter() - started
    assert elapsed <= 120.0, f"load-test criterion took {elapsed:.1f}s (budget 2 min)"
    ok(f"load test (QPS {qps_run.qps:.3f} in [0.95,1.05]; seeded rerun identical; p90 = sorting oracle)")


# -------------------------------------------------------------- fleet simulator

def test_fleet_simulator_renewal_and_reproducibility():
    started = time.perf_counter()
    quiet = simulate_fleet(FleetSimConfig(
        fleet_size=10, eviction_rate_per_hour=0.0, horizon_s=90 * 86400.0, seed=1))
    assert quiet.mean_availability == 1.0
    assert quiet.eviction_count == 0

    cfg = FleetSimConfig(
        fleet_size=10, eviction_rate_per_hour=0.01,  # MTBF 100 h
        startup_min_s=300.0, startup_max_s=900.0,    # mean 10 min
        horizon_s=90 * 86400.0, seed=2024,
    )
    report = simulate_fleet(cfg)
    predicted = (100 * 3600.0) / (100 * 3600.0 + 600.0)
    assert predicted == pytest.approx(0.9983, abs=5e-4)
    rel_err = abs(report.mean_availability - predicted) / predicted
    assert rel_err < 0.01, f"availability {report.mean_availability} vs renewal {predicted}"

    again = simulate_fleet(cfg)
    assert again == report
    assert json.dumps(again.to_dict()) == json.dumps(report.to_dict())

    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"fleet criterion took {elapsed:.1f}s (budget 30s)"
    ok(f"fleet simulator (rate 0 -> 1.0; renewal within {rel_err:.3%}; bit-identical reruns)")


# -------------------------------------------------------------- fan-out latency

def test_fanout_latency_under_180ms():
    results_a = [{"id": f"a{i}", "title": None, "url": f"http://a.example/{i}",
                  "snippet": f"text {i}"} for i in range(5)]
    results_b = [{"id": f"b{i}", "title": None, "url": f"http://b.example/{i}",
                  "snippet": f"text {i}"} for i in range(5)]
    with StubServer(results=results_a, delay_s=0.1) as a, StubServer(results=results_b, delay_s=0.1) as b:
        sources = [
            ExternalSource(ExternalSourceConfig(name="a", endpoint=a.url)),
            ExternalSource(ExternalSourceConfig(name="b", endpoint=b.url)),
        ]
        from nsx.sources import timed_retrieve

        pool, elapsed = timed_retrieve("query", sources, timeout=2.0)
    assert len(pool.documents) == 10
    assert elapsed < 0.180, f"stage-1 fan-out took {elapsed * 1000:.0f}ms with two 100ms sources"
    ok(f"fan-out latency ({elapsed * 1000:.0f}ms < 180ms for two 100ms sources)")


# ------------------------------------------------------------------ end-to-end

def test_end_to_end_golden_top10(tmp_path):
    corpus = write_corpus_tsv(tmp_path / "corpus.tsv", n_docs=1000, seed=811)
    buf = io.StringIO()
    with redirect_stdout(buf):
        cli_main(["index", "--corpus", str(corpus), "--out", str(tmp_path / "idx")])
    buf = io.StringIO()
    with redirect_stdout(buf):
        cli_main(["search", "--index", str(tmp_path / "idx"),
                  "--query", "data privacy ruling", "-k", "10", "--rerank"])
    got = buf.getvalue().encode("utf-8")
    golden = (DATA_DIR / "golden_search_top10.txt").read_bytes()
    assert got == golden, "top-10 ranking deviates from the committed golden file"
    ok("end-to-end (seeded 1000-doc corpus -> byte-stable golden top-10)")


# ------------------------------------------- secondary criteria (API level)

def annotation_fixture(tmp_path):
    corpus = [(f"doc{i:02d}", f"Case {i}",
               f"The law of case {i}. Courts handle case {i}. Topic{i} filler. More justice text.")
              for i in range(15)]
    index = build_index(corpus)
    index.save(tmp_path / "idx")
    stub = StubServer(results=[
        {"id": f"w{i}", "title": f"Web {i}", "url": f"http://web.example/{i}",
         "snippet": f"web snippet {i} about law"} for i in range(10)
    ]).start()
    config = ServiceConfig(
        index_dir=str(tmp_path / "idx"),
        sources=[ExternalSourceConfig(name="webstub", endpoint=stub.url)],
        judgment_store=str(tmp_path / "labels.jsonl"),
        engines={
            "ranked": EngineSpec(name="ranked", kind="pipeline"),
            "raw_web": EngineSpec(name="raw_web", kind="source_order", source="webstub"),
        },
    )
    service = SearchService(config)
    store = JudgmentStore(config.judgment_store)
    return stub, config, service, store


def test_blinding_swap_fraction_and_payload():
    rng_lists = [{"doc_id": f"d{i}", "title": None, "url": None,
                  "display_text": "text", "score": float(10 - i)} for i in range(10)]

    class NullService:
        pass

    config = ServiceConfig(
        index_dir="unused", judgment_store="/dev/null",
        engines={"alpha": EngineSpec(name="alpha", kind="pipeline"),
                 "beta": EngineSpec(name="beta", kind="pipeline")},
    )

    class MemoryStore:
        def append(self, record):
            pass

        def sessions(self):
            return {}

        def effective_labels(self):
            return {}

    manager = SessionManager(config, NullService(), MemoryStore())
    manager._fetch_engine_list = lambda spec, query: list(rng_lists)

    swaps = 0
    sample_payload = None
    for seed in range(10_000):
        session = manager.create_session("the query", "alpha", "beta", seed=seed)
        swaps += session.swap
        if sample_payload is None:
            sample_payload = session.client_view()
    fraction = swaps / 10_000
    assert abs(fraction - 0.5) <= 0.02, f"swap fraction {fraction}"

    blob = json.dumps(sample_payload)
    assert "alpha" not in blob and "beta" not in blob and "engine" not in blob
    assert "swap" not in blob
    assert set(sample_payload) == {
        "session_id", "query", "grade_scale", "left", "right", "labeled", "label_total",
    }
    ok(f"blinding [secondary] (swap fraction {fraction:.4f} in 0.5±0.02; payload engine-free)")


def test_annotation_round_trip_matches_evaluation_oracle(tmp_path):
    stub, config, service, store = annotation_fixture(tmp_path)
    try:
        client = TestClient(create_app(config, service=service, store=store))
        grades = [2, 0, 1, 1, 0, 2, 0, 1, 2, 0]
        for swap, query in ((False, "law case"), (True, "justice topic3")):
            view = client.post("/annotation/session", json={
                "query": query, "engine_a": "ranked", "engine_b": "raw_web", "swap": swap,
            }).json()
            for side in ("left", "right"):
                for position in range(1, len(view[side]) + 1):
                    response = client.post(f"/annotation/{view['session_id']}/label", json={
                        "side": side, "position": position, "grade": grades[position - 1],
                    })
                    assert response.status_code == 200
        for engine in ("ranked", "raw_web"):
            run_path = tmp_path / f"{engine}.run"
            qrels_path = tmp_path / f"{engine}.qrels"
            write_run(store.export_run(engine), run_path)
            write_qrels(store.export_qrels(engine), qrels_path)
            report = evaluate(parse_run(run_path), parse_qrels(qrels_path), ["ndcg@10"])
            # oracle: both queries got the same grade-by-rank pattern
            dcg = sum(g / math.log2(i + 1) for i, g in enumerate(grades, 1))
            idcg = sum(g / math.log2(i + 1) for i, g in enumerate(sorted(grades, reverse=True), 1))
            assert report.query_count == 2
            assert report.means["ndcg@10"] == pytest.approx(dcg / idcg, abs=1e-12)
    finally:
        stub.stop()
    ok("annotation round-trip [secondary] (export -> evaluate equals nDCG@10 oracle)")

"""Command-line entry points: nsx {index,search,rerank,eval,simulate-pool,loadtest,serve,export-judgments}."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .evaluation import evaluate, parse_qrels, parse_run, write_qrels, write_run
from .index import Bm25Params, Index, bm25_search, build_index
from .loadtest import LoadTestConfig, run_loadtest
from .pool import FleetSimConfig, simulate_fleet
from .reranking import LexicalCrossScorer, RemoteScorer, shard_dispatch
from .segmentation import WindowConfig

_DURATION_UNITS = {"s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0}
_DURATION_RE = re.compile(r"^(\d+(?:\.\d+)?)([smhd]?)$")


def parse_duration(text: str) -> float:
    """'90d', '20m', '900s', '1.5h' or bare seconds -> seconds."""
    match = _DURATION_RE.match(text.strip())
    if not match:
        raise argparse.ArgumentTypeError(f"bad duration {text!r} (use e.g. 900s, 20m, 1.5h, 90d)")
    value, unit = match.groups()
    return float(value) * _DURATION_UNITS[unit or "s"]


def read_corpus(path: Path):
    """Tab-separated corpus lines: doc_id, title, text."""
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise SystemExit(f"{path}:{line_no}: expected 3 tab-separated fields, got {len(parts)}")
            yield tuple(parts)


def make_scorer(spec: str, timeout: float = 10.0):
    if spec == "lexical":
        return LexicalCrossScorer()
    if spec.startswith("remote:"):
        return RemoteScorer(spec.split(":", 1)[1], timeout=timeout)
    raise SystemExit(f"unknown scorer {spec!r} (use 'lexical' or 'remote:URL')")


def cmd_index(args) -> int:
    cfg = WindowConfig(window_size=args.window, stride=args.stride)
    index = build_index(read_corpus(Path(args.corpus)), cfg)
    path = index.save(args.out)
    print(f"indexed {index.doc_count} documents as {index.passage_count} passages -> {path}")
    return 0


def cmd_search(args) -> int:
    index = Index.load(args.index)
    params = Bm25Params(k1=args.k1, b=args.b)
    results = bm25_search(index, args.query, args.k, params)
    if args.rerank:
        from .reranking import MergeConfig, merge_and_rank
        from .sources import CandidatePool

        pool = CandidatePool(query_id="cli", query=args.query, documents=results)
        ranked = merge_and_rank(
            pool,
            make_scorer(args.scorer),
            MergeConfig(window=index.window, shard_count=args.shards),
        )
        for entry in ranked.entries[: args.k]:
            print(f"{entry.rank}\t{entry.document.doc_id}\t{entry.rerank_score:.6f}")
    else:
        for rank, doc in enumerate(results, start=1):
            print(f"{rank}\t{doc.doc_id}\t{doc.stage1_score:.6f}")
    return 0


def cmd_rerank(args) -> int:
    texts = [line for line in Path(args.texts).read_text(encoding="utf-8").splitlines() if line]
    scorer = make_scorer(args.scorer)
    scores = shard_dispatch(args.query, texts, scorer=scorer, shard_count=args.shards)
    order = sorted(range(len(texts)), key=lambda i: (-scores[i], i))
    for rank, i in enumerate(order, start=1):
        print(f"{rank}\t{scores[i]:.6f}\t{i}\t{texts[i][:80]}")
    return 0


def cmd_eval(args) -> int:
    run = parse_run(args.run)
    qrels = parse_qrels(args.qrels)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    report = evaluate(run, qrels, metrics, exponential_gain=(args.gain == "exp"))
    print(report.table())
    if args.json:
        payload = {
            "means": report.means,
            "query_count": report.query_count,
            "per_query": report.per_query,
        }
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"report written to {args.json}")
    return 0


def cmd_simulate_pool(args) -> int:
    cfg = FleetSimConfig(
        fleet_size=args.fleet,
        eviction_rate_per_hour=args.eviction_rate,
        startup_min_s=parse_duration(args.startup_min),
        startup_max_s=parse_duration(args.startup_max),
        horizon_s=parse_duration(args.horizon),
        seed=args.seed,
        reliable_workers=args.reliable,
    )
    report = simulate_fleet(cfg)
    print(
        f"evictions {report.eviction_count}, mean availability {report.mean_availability:.4f}, "
        f"time below 80% capacity {report.fraction_of_time_below(0.8):.4%}"
    )
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        print(f"report written to {args.report}")
    return 0


def cmd_loadtest(args) -> int:
    queries = [
        line.strip()
        for line in Path(args.queries).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    cfg = LoadTestConfig(
        target=args.target,
        users=args.users,
        duration_s=parse_duration(args.duration),
        query_set=tuple(queries),
        think_min_s=args.think_min,
        think_max_s=args.think_max,
        seed=args.seed,
    )
    report = run_loadtest(cfg)
    print(report.summary())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app, load_config

    app = create_app(load_config(args.config))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_export_judgments(args) -> int:
    from .gateway.store import JudgmentStore

    store = JudgmentStore(args.store)
    engines = [args.engine] if args.engine else store.engines()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for engine in engines:
        qrels_path = out_dir / f"{engine}.qrels"
        run_path = out_dir / f"{engine}.run"
        write_qrels(store.export_qrels(engine), qrels_path)
        write_run(store.export_run(engine), run_path)
        print(f"{engine}: {qrels_path} {run_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a passage index from a TSV corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=150)
    p.add_argument("--stride", type=int, default=75)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="query a passage index")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--rerank", action="store_true", help="rerank BM25 candidates with the scorer")
    p.add_argument("--scorer", default="lexical")
    p.add_argument("--shards", type=int, default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rerank", help="score texts from a file against a query")
    p.add_argument("--query", required=True)
    p.add_argument("--texts", required=True, help="file with one text per line")
    p.add_argument("--scorer", default="lexical", help="lexical or remote:URL")
    p.add_argument("--shards", type=int, default=10)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="score a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metrics", default="mrr@10,ndcg@20,map,p@10,r@10")
    p.add_argument("--gain", choices=["linear", "exp"], default="linear")
    p.add_argument("--json", default=None, help="also write a JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate-pool", help="simulate a preemptible scoring fleet")
    p.add_argument("--fleet", type=int, default=10)
    p.add_argument("--eviction-rate", type=float, required=True, help="per-worker events/hour")
    p.add_argument("--startup-min", default="5m")
    p.add_argument("--startup-max", default="20m")
    p.add_argument("--horizon", default="90d")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reliable", type=int, default=0, help="workers that never evict")
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_simulate_pool)

    p = sub.add_parser("loadtest", help="closed-loop load test against a search endpoint")
    p.add_argument("--target", required=True)
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--duration", default="900s")
    p.add_argument("--queries", required=True, help="file with one query per line")
    p.add_argument("--think-min", type=float, default=1.0)
    p.add_argument("--think-max", type=float, default=15.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_loadtest)

    p = sub.add_parser("serve", help="run the gateway")
    p.add_argument("--config", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-judgments", help="export qrels/run files from a judgment store")
    p.add_argument("--store", required=True)
    p.add_argument("--engine", default=None, help="one engine (default: all seen)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export_judgments)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Walk the full pipeline in-process: index a toy corpus, fan out to a stub
web source, merge with the lexical cross-scorer, and highlight the winners.

Run: python demos/end_to_end_search.py
"""

from nsx import build_index, merge_and_rank, highlight_top
from nsx.reranking import LexicalCrossScorer, MergeConfig
from nsx.segmentation import WindowConfig
from nsx.sources import (
    ExternalSource,
    ExternalSourceConfig,
    LocalIndexSource,
    federated_retrieve,
)
from nsx.stubserver import StubServer

CORPUS = [
    ("tides", "Tidal energy primer",
     "Tidal turbines convert flowing water into power. Output is predictable because tides "
     "follow the moon. Maintenance at sea is the main cost driver. Coastal grids benefit most."),
    ("solar", "Solar farm basics",
     "Photovoltaic panels convert sunlight into power. Cloud cover makes output variable. "
     "Panel prices have fallen for a decade. Land use is the main siting constraint."),
    ("wind", "Wind power overview",
     "Wind turbines convert moving air into power. Offshore sites are windier but pricier. "
     "Forecasting helps grids absorb variable output. Blade recycling remains unsolved."),
]

WEB_RESULTS = [
    {"id": "blog-1", "title": "Grid storage explained", "url": "http://web.example/storage",
     "snippet": "Batteries smooth variable power output from wind and solar farms."},
    {"id": "blog-2", "title": "Why tides are predictable", "url": "http://web.example/tides",
     "snippet": "Tidal power output can be scheduled years ahead, unlike wind."},
]

QUERY = "predictable power output"


def main() -> None:
    index = build_index(CORPUS, WindowConfig(window_size=20, stride=10))
    print(f"indexed {index.doc_count} docs as {index.passage_count} passages")

    with StubServer(results=WEB_RESULTS) as web:
        sources = [
            LocalIndexSource(index, k=10),
            ExternalSource(ExternalSourceConfig(name="webstub", endpoint=web.url)),
        ]
        pool = federated_retrieve(QUERY, sources, timeout=2.0)
        print(f"candidate pool: {len(pool.documents)} docs from {sorted(pool.per_source_counts)}")

        scorer = LexicalCrossScorer()
        ranked = merge_and_rank(pool, scorer, MergeConfig(window=index.window))
        ranked = highlight_top(ranked, scorer, top_n=3)

    print(f"\nresults for {QUERY!r}:")
    for entry in ranked.entries:
        doc = entry.document
        print(f"{entry.rank}. [{doc.source}] {doc.doc_id}  score={entry.rerank_score:.4f}")
        if entry.highlights:
            for sentence in entry.highlights:
                print(f"     >> {sentence.text}")
        elif doc.is_snippet:
            print(f"     (snippet) {doc.text}")


if __name__ == "__main__":
    main()

"""Multistage metasearch engine with pluggable relevance scoring.

Stage 1 retrieves candidates from a local passage index and external sources
in parallel; stage 2 merges everything into one list ranked purely by a
cross-scorer; stage 3 highlights the best sentences of the top results.
Around the pipeline: effectiveness evaluation, load testing, a preemptible-
fleet simulator, and a gateway with a blinded A/B annotation protocol.
"""

from .evaluation import Judgment, MetricReport, RunEntry, evaluate, parse_qrels, parse_run
from .highlighting import Highlight, highlight_top
from .index import Bm25Params, DuplicateDocumentError, Index, bm25_search, build_index
from .loadtest import LoadTestConfig, LoadTestReport, run_loadtest
from .pool import (
    FleetSimConfig,
    FleetSimReport,
    PoolUnavailableError,
    ShardRequest,
    Worker,
    WorkerEvicted,
    WorkerPool,
    WorkerStatus,
    pool_submit,
    simulate_fleet,
)
from .reranking import (
    LexicalCrossScorer,
    MergeConfig,
    RankedEntry,
    RankedList,
    RemoteScorer,
    Scorer,
    ScoringError,
    ShardPlan,
    lexical_cross_score,
    merge_and_rank,
    remote_score,
    shard_dispatch,
)
from .segmentation import (
    Passage,
    Sentence,
    WindowConfig,
    split_into_sentences,
    split_into_windows,
    tokenize_words,
)
from .sources import (
    AllSourcesFailedError,
    CandidatePool,
    ExternalSourceConfig,
    SourceDocument,
    federated_retrieve,
    fetch_external,
    normalize_url,
)

__version__ = "0.1.0"

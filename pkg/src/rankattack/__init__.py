"""One-word adversarial attacks on text retrieval rankings.

The pipeline: BM25 retrieves candidate documents, a differentiable
reference ranker reranks them, and three single-word attack strategies try
to push a chosen document up the ranking. Evaluation measures success
rate, semantic similarity, perturbation size, rank and score boosts, and
success rates bucketed by the target's original rank.
"""

from .attacks import (
    STRATEGIES,
    Edit,
    apply_edit,
    attack_best_grad,
    attack_sim,
    attack_start,
    run_strategy,
)
from .bm25 import Bm25Index, build_index, load_index, retrieve, save_index
from .campaign import (
    CampaignConfig,
    CampaignPaths,
    emit_isr_plotdata,
    make_config,
    parse_config_file,
    reports_by_strategy,
    run_campaign,
)
from .embeddings import (
    EmbeddingStore,
    QueryCenter,
    centroid,
    cosine,
    document_similarity,
    load_embeddings,
    nearest_token,
    query_center,
)
from .errors import (
    CapabilityError,
    ConfigError,
    DataFormatError,
    NoCandidateError,
    NoCenterError,
    RankAttackError,
)
from .metrics import (
    ISR_INTERVALS,
    AttackResult,
    IsrBucket,
    MetricsReport,
    aggregate,
    evaluate_attack,
    load_results,
    perturbation_pct,
    result_from_json,
    result_to_json,
    write_results,
)
from .ranker import (
    RankedList,
    RankEntry,
    Ranker,
    RankerParams,
    ReferenceRanker,
    TokenGradient,
)
from .text import (
    Document,
    Query,
    Token,
    infer_corpus_format,
    load_corpus,
    load_queries,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AttackResult",
    "Bm25Index",
    "CampaignConfig",
    "CampaignPaths",
    "CapabilityError",
    "ConfigError",
    "DataFormatError",
    "Document",
    "Edit",
    "EmbeddingStore",
    "ISR_INTERVALS",
    "IsrBucket",
    "MetricsReport",
    "NoCandidateError",
    "NoCenterError",
    "Query",
    "QueryCenter",
    "RankAttackError",
    "RankEntry",
    "RankedList",
    "Ranker",
    "RankerParams",
    "ReferenceRanker",
    "STRATEGIES",
    "Token",
    "TokenGradient",
    "aggregate",
    "apply_edit",
    "attack_best_grad",
    "attack_sim",
    "attack_start",
    "build_index",
    "centroid",
    "cosine",
    "document_similarity",
    "emit_isr_plotdata",
    "evaluate_attack",
    "infer_corpus_format",
    "load_corpus",
    "load_embeddings",
    "load_index",
    "load_queries",
    "load_results",
    "make_config",
    "nearest_token",
    "parse_config_file",
    "perturbation_pct",
    "query_center",
    "reports_by_strategy",
    "result_from_json",
    "result_to_json",
    "retrieve",
    "run_campaign",
    "run_strategy",
    "save_index",
    "tokenize",
    "write_results",
]

"""Attack-campaign orchestration.

A campaign ties the pieces together: load corpus, queries, and embeddings,
build a BM25 index, and then for every query retrieve the top candidates,
rerank them with the reference ranker, and attack every document whose
rank falls in the configured window under every configured strategy.
Results land in the output directory as

    results.jsonl   one AttackResult per line, ordered by
                    (query_id, doc_id, strategy)
    report.json     per-strategy MetricsReport
    report.csv      one row per strategy, one column per metric
    isr.csv         interval success rates in long form for plotting

Everything is deterministic for a fixed config: inputs are read in full,
queries are processed in sorted order, and files carry no timestamps, so
two runs produce byte-identical output.
"""

import csv
import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Sequence

from .attacks import STRATEGIES, apply_edit, run_strategy
from .bm25 import build_index, retrieve
from .embeddings import EmbeddingStore, load_embeddings, query_center
from .errors import ConfigError, NoCandidateError, NoCenterError
from .metrics import (
    ISR_INTERVALS,
    AttackResult,
    MetricsReport,
    aggregate,
    evaluate_attack,
    report_to_json,
    write_report_csv,
    write_results,
)
from .ranker import Ranker, RankerParams, ReferenceRanker
from .text import Query, infer_corpus_format, load_corpus, load_queries

_INT_FIELDS = ("topk", "rank_lo", "rank_hi", "k", "seed", "loss_top_m")
_FLOAT_FIELDS = ("beta", "lambda_pos", "k1", "b")


@dataclass(frozen=True)
class CampaignConfig:
    """Everything a campaign needs; invalid values raise ConfigError."""

    corpus: str
    queries: str
    embeddings: str
    out_dir: str
    strategies: tuple[str, ...] = STRATEGIES
    corpus_format: str | None = None
    topk: int = 100
    rank_lo: int = 11
    rank_hi: int = 100
    k: int = 20
    beta: float = 1.0
    lambda_pos: float = 0.01
    k1: float = 0.9
    b: float = 0.4
    loss_top_m: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.strategies, str):
            object.__setattr__(self, "strategies", (self.strategies,))
        else:
            object.__setattr__(self, "strategies", tuple(self.strategies))
        for name in _INT_FIELDS:
            self._coerce(name, int)
        for name in _FLOAT_FIELDS:
            self._coerce(name, float)
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
        if self.corpus_format is not None and self.corpus_format not in ("tsv", "jsonl"):
            raise ConfigError(f"corpus_format must be tsv or jsonl, got {self.corpus_format!r}")
        if self.topk < 1:
            raise ConfigError("topk must be at least 1")
        if not 1 <= self.rank_lo <= self.rank_hi <= self.topk:
            raise ConfigError(
                f"rank range must satisfy 1 <= lo <= hi <= topk, got [{self.rank_lo}, {self.rank_hi}] with topk {self.topk}"
            )
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.lambda_pos < 0:
            raise ConfigError("lambda_pos must be non-negative")
        if self.k1 <= 0:
            raise ConfigError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError("b must lie in [0, 1]")
        if self.loss_top_m is not None and self.loss_top_m < 1:
            raise ConfigError("loss_top_m must be at least 1")

    def _coerce(self, name: str, kind: type) -> None:
        value = getattr(self, name)
        if value is None and name == "loss_top_m":
            return
        try:
            object.__setattr__(self, name, kind(value))
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be a {kind.__name__}, got {value!r}") from None


_CONFIG_KEYS = frozenset(f.name for f in fields(CampaignConfig))
_REQUIRED_KEYS = ("corpus", "queries", "embeddings", "out_dir")


def parse_config_file(path) -> dict:
    """Read a flat `key = value` config file.

    Values are parsed as JSON where possible (numbers, booleans, quoted
    strings, arrays); anything else is taken as a bare string. Lines that
    are blank or start with # are ignored.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    out: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {line!r}")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def make_config(values: Mapping) -> CampaignConfig:
    """Build a CampaignConfig from merged file/flag values.

    None values are treated as unset and fall back to defaults.
    """
    unknown = sorted(set(values) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    present = {k: v for k, v in values.items() if v is not None}
    missing = [k for k in _REQUIRED_KEYS if k not in present]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    return CampaignConfig(**present)


@dataclass(frozen=True)
class CampaignPaths:
    results: Path
    report_json: Path
    report_csv: Path
    isr_csv: Path


def _attack_query(
    q: Query,
    docs_by_id: Mapping,
    index,
    ranker: Ranker,
    store: EmbeddingStore,
    config: CampaignConfig,
    strategies: Sequence[str],
) -> list[AttackResult]:
    try:
        query_center(q, store)
    except NoCenterError as exc:
        # The reranker cannot even score this query; record one skip per strategy.
        return [
            AttackResult(query_id=q.query_id, doc_id="", strategy=s, status="skipped", skip_reason=str(exc))
            for s in strategies
        ]
    hits = retrieve(q, index, k=config.topk)
    if not hits:
        return []
    ranked = ranker.rerank(q, [docs_by_id[doc_id] for doc_id, _ in hits])
    out: list[AttackResult] = []
    for entry in ranked:
        if not config.rank_lo <= entry.rank <= config.rank_hi:
            continue
        d = docs_by_id[entry.doc_id]
        in_vocab = any(t.norm in store for t in d.tokens)
        for s in strategies:
            if not in_vocab:
                out.append(
                    AttackResult(
                        query_id=q.query_id, doc_id=d.doc_id, strategy=s, status="skipped",
                        skip_reason="document has no in-vocabulary token",
                    )
                )
                continue
            try:
                edit = run_strategy(s, q, d, store, ranker, ranked, k=config.k)
            except NoCandidateError as exc:
                out.append(
                    AttackResult(
                        query_id=q.query_id, doc_id=d.doc_id, strategy=s, status="skipped",
                        skip_reason=str(exc),
                    )
                )
                continue
            out.append(evaluate_attack(q, d, apply_edit(d, edit), edit, ranked, ranker, store, s))
    return out


def reports_by_strategy(
    results: Sequence[AttackResult], strategies: Sequence[str] | None = None
) -> dict[str, MetricsReport]:
    """Aggregate per strategy; configured strategies get a row even if empty."""
    names = sorted(set(strategies) if strategies is not None else {r.strategy for r in results})
    return {s: aggregate([r for r in results if r.strategy == s]) for s in names}


def write_report_json(reports: Mapping[str, MetricsReport], path) -> None:
    payload = {s: report_to_json(rep) for s, rep in reports.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def emit_isr_plotdata(reports: Mapping[str, MetricsReport], path) -> None:
    """Long-form CSV of interval success rates, one row per bucket and strategy."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["interval_lo", "interval_hi", "strategy", "isr_pct", "attempts"])
        for i, (lo, hi) in enumerate(ISR_INTERVALS):
            for strategy in sorted(reports):
                bucket = reports[strategy].isr[i]
                writer.writerow(
                    [lo, hi, strategy, "" if bucket.isr_pct is None else bucket.isr_pct, bucket.attempts]
                )


def write_all_reports(reports: Mapping[str, MetricsReport], out_dir: Path) -> tuple[Path, Path, Path]:
    report_json = out_dir / "report.json"
    report_csv = out_dir / "report.csv"
    isr_csv = out_dir / "isr.csv"
    write_report_json(reports, report_json)
    write_report_csv(reports, report_csv)
    emit_isr_plotdata(reports, isr_csv)
    return report_json, report_csv, isr_csv


def run_campaign(config: CampaignConfig) -> CampaignPaths:
    """Execute a full campaign and write results plus reports.

    Per-query work is independent; results are emitted in canonical
    (query_id, doc_id, strategy) order regardless of processing order.
    """
    corpus_format = config.corpus_format or infer_corpus_format(config.corpus)
    corpus = load_corpus(config.corpus, format=corpus_format)
    queries = load_queries(config.queries)
    store = load_embeddings(config.embeddings)
    index = build_index(corpus, k1=config.k1, b=config.b)
    params = RankerParams(lambda_pos=config.lambda_pos, beta=config.beta, seed=config.seed)
    ranker = ReferenceRanker(store, params, loss_top_m=config.loss_top_m)
    docs_by_id = {d.doc_id: d for d in corpus}
    strategies = tuple(sorted(set(config.strategies)))

    results: list[AttackResult] = []
    for q in sorted(queries, key=lambda query: query.query_id):
        results.extend(_attack_query(q, docs_by_id, index, ranker, store, config, strategies))
    results.sort(key=lambda r: (r.query_id, r.doc_id, r.strategy))

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.jsonl"
    write_results(results, results_path)
    reports = reports_by_strategy(results, strategies)
    report_json, report_csv, isr_csv = write_all_reports(reports, out_dir)
    return CampaignPaths(results_path, report_json, report_csv, isr_csv)

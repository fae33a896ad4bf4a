"""Per-attack outcomes and aggregate evaluation.

An attack on one (query, document, strategy) triple produces an AttackResult.
Success is strict: the perturbed document must land at a better (smaller)
rank than the original after its score replaces the original's and the list
is re-sorted under the usual tie rule. A batch of results aggregates into a
MetricsReport holding

  * sr        - success rate, percent of attempted attacks that improved rank
  * ss_mean   - mean semantic similarity between original and perturbed doc
  * pp_mean   - mean perturbation percentage (edited tokens / original length)
  * rb_mean   - mean rank boost, orig_rank - new_rank (negative on failures)
  * sb_mean   - mean score boost, new_score - orig_score
  * isr       - success rate bucketed by the original rank's decade, 11..100

plus success-only rank/score boost means for comparison. Attacks that could
not run (for example a query with no in-vocabulary token) are recorded as
skipped and excluded from every average.
"""

import csv
import json
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from .attacks import Edit
from .embeddings import EmbeddingStore, document_similarity
from .ranker import RankedList, Ranker
from .text import Document, Query

ISR_INTERVALS = tuple((lo, lo + 9) for lo in range(11, 100, 10))

_STATUSES = ("attempted", "skipped")


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one attack, or a record of why it was skipped."""

    query_id: str
    doc_id: str
    strategy: str
    status: str
    orig_rank: int | None = None
    new_rank: int | None = None
    orig_score: float | None = None
    new_score: float | None = None
    ss: float | None = None
    pp: float | None = None
    edit: Edit | None = None
    skip_reason: str | None = None

    def __post_init__(self) -> None:
        if self.status not in _STATUSES:
            raise ValueError(f"status must be one of {_STATUSES}, got {self.status!r}")
        if self.status == "attempted":
            fields = (self.orig_rank, self.new_rank, self.orig_score, self.new_score, self.ss, self.pp, self.edit)
            if any(v is None for v in fields):
                raise ValueError("attempted result is missing rank, score, ss, pp, or edit")
            if self.orig_rank < 1 or self.new_rank < 1:
                raise ValueError("ranks are 1-based")
            if not 0.0 <= self.ss <= 1.0:
                raise ValueError(f"ss must lie in [0, 1], got {self.ss}")
            if self.pp <= 0.0:
                raise ValueError("pp must be positive for an attempted result")
        else:
            if not self.skip_reason:
                raise ValueError("skipped result needs a skip_reason")

    @property
    def success(self) -> bool:
        return self.status == "attempted" and self.new_rank < self.orig_rank

    @property
    def rank_boost(self) -> int | None:
        if self.status != "attempted":
            return None
        return self.orig_rank - self.new_rank

    @property
    def score_boost(self) -> float | None:
        if self.status != "attempted":
            return None
        return self.new_score - self.orig_score


@dataclass(frozen=True)
class IsrBucket:
    """Success rate within one original-rank decade."""

    lo: int
    hi: int
    attempts: int
    successes: int

    @property
    def isr_pct(self) -> float | None:
        """Success percentage, or None when the bucket saw no attempts."""
        if self.attempts == 0:
            return None
        return 100.0 * self.successes / self.attempts


@dataclass(frozen=True)
class MetricsReport:
    sr: float
    ss_mean: float
    pp_mean: float
    rb_mean: float
    sb_mean: float
    rb_mean_success: float | None
    sb_mean_success: float | None
    isr: tuple[IsrBucket, ...]
    attempted_count: int
    success_count: int
    skipped_count: int


def evaluate_attack(
    q: Query,
    d: Document,
    d_adv: Document,
    edit: Edit,
    ranked: RankedList,
    ranker: Ranker,
    store: EmbeddingStore,
    strategy: str,
) -> AttackResult:
    """Score the perturbed document and measure its movement in the list.

    The perturbed document takes the original's place: its new score replaces
    d's entry and the whole list is re-sorted (ties by ascending doc_id)
    before the new rank is read off.
    """
    orig = ranked.entry(d.doc_id)
    new_score = ranker.score(q, d_adv)
    rescored = [(e.doc_id, e.score) for e in ranked if e.doc_id != d.doc_id]
    rescored.append((d.doc_id, new_score))
    new_rank = RankedList.from_scores(ranked.query_id, rescored).entry(d.doc_id).rank
    return AttackResult(
        query_id=ranked.query_id,
        doc_id=d.doc_id,
        strategy=strategy,
        status="attempted",
        orig_rank=orig.rank,
        new_rank=new_rank,
        orig_score=orig.score,
        new_score=new_score,
        ss=document_similarity(d, d_adv, store),
        pp=perturbation_pct(d, edit),
        edit=edit,
    )


def perturbation_pct(d: Document, edit: Edit) -> float:
    """Percentage of tokens modified, against the original token count."""
    if len(d) == 0:
        raise ValueError(f"doc {d.doc_id!r} is empty")
    return 100.0 / len(d)


def aggregate(results: Sequence[AttackResult]) -> MetricsReport:
    """Fold a batch of results into one report.

    Averages run over attempted results only; an empty batch yields a report
    of zeros with every bucket empty.
    """
    attempted = [r for r in results if r.status == "attempted"]
    skipped = len(results) - len(attempted)
    successes = [r for r in attempted if r.success]

    buckets = []
    for lo, hi in ISR_INTERVALS:
        inside = [r for r in attempted if lo <= r.orig_rank <= hi]
        buckets.append(IsrBucket(lo, hi, len(inside), sum(1 for r in inside if r.success)))

    return MetricsReport(
        sr=100.0 * len(successes) / len(attempted) if attempted else 0.0,
        ss_mean=fmean(r.ss for r in attempted) if attempted else 0.0,
        pp_mean=fmean(r.pp for r in attempted) if attempted else 0.0,
        rb_mean=fmean(r.rank_boost for r in attempted) if attempted else 0.0,
        sb_mean=fmean(r.score_boost for r in attempted) if attempted else 0.0,
        rb_mean_success=fmean(r.rank_boost for r in successes) if successes else None,
        sb_mean_success=fmean(r.score_boost for r in successes) if successes else None,
        isr=tuple(buckets),
        attempted_count=len(attempted),
        success_count=len(successes),
        skipped_count=skipped,
    )


def result_to_json(r: AttackResult) -> dict:
    """Plain-dict form of a result, stable under json.dumps(sort_keys=True)."""
    edit = None
    if r.edit is not None:
        edit = {"kind": r.edit.kind, "position": r.edit.position, "token": r.edit.token, "replaced": r.edit.replaced}
    return {
        "query_id": r.query_id,
        "doc_id": r.doc_id,
        "strategy": r.strategy,
        "status": r.status,
        "orig_rank": r.orig_rank,
        "new_rank": r.new_rank,
        "orig_score": r.orig_score,
        "new_score": r.new_score,
        "rank_boost": r.rank_boost,
        "score_boost": r.score_boost,
        "ss": r.ss,
        "pp": r.pp,
        "success": r.success if r.status == "attempted" else None,
        "edit": edit,
        "skip_reason": r.skip_reason,
    }


def result_from_json(obj: Mapping) -> AttackResult:
    """Inverse of result_to_json; derived fields are recomputed, not trusted."""
    edit = None
    if obj.get("edit") is not None:
        e = obj["edit"]
        edit = Edit(kind=e["kind"], position=e["position"], token=e["token"], replaced=e.get("replaced"))
    return AttackResult(
        query_id=obj["query_id"],
        doc_id=obj["doc_id"],
        strategy=obj["strategy"],
        status=obj["status"],
        orig_rank=obj.get("orig_rank"),
        new_rank=obj.get("new_rank"),
        orig_score=obj.get("orig_score"),
        new_score=obj.get("new_score"),
        ss=obj.get("ss"),
        pp=obj.get("pp"),
        edit=edit,
        skip_reason=obj.get("skip_reason"),
    )


def report_to_json(report: MetricsReport) -> dict:
    """Serialized form; ss is labeled ss_mwe to flag the mean-word-embedding substitute."""
    return {
        "sr": report.sr,
        "ss_mwe_mean": report.ss_mean,
        "pp_mean": report.pp_mean,
        "rb_mean": report.rb_mean,
        "sb_mean": report.sb_mean,
        "rb_mean_success": report.rb_mean_success,
        "sb_mean_success": report.sb_mean_success,
        "attempted": report.attempted_count,
        "successes": report.success_count,
        "skipped": report.skipped_count,
        "isr": [
            {"lo": b.lo, "hi": b.hi, "attempts": b.attempts, "successes": b.successes, "isr_pct": b.isr_pct}
            for b in report.isr
        ],
    }


def write_results(results: Iterable[AttackResult], path) -> None:
    """One JSON object per line, keys sorted, canonical result order."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(result_to_json(r), sort_keys=True))
            fh.write("\n")


def load_results(path) -> list[AttackResult]:
    from .errors import DataFormatError

    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(result_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataFormatError(f"{path}:{lineno}: bad result line: {exc}") from exc
    return out


def write_report_csv(reports: Mapping[str, MetricsReport], path) -> None:
    """Flat CSV: one row per strategy, one column per metric, nine ISR columns."""
    isr_cols = [f"isr_{lo}_{hi}" for lo, hi in ISR_INTERVALS]
    header = [
        "strategy", "sr", "ss_mwe_mean", "pp_mean", "rb_mean", "sb_mean",
        "rb_mean_success", "sb_mean_success", "attempted", "successes", "skipped",
    ] + isr_cols
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for strategy in sorted(reports):
            rep = reports[strategy]
            row = [
                strategy, rep.sr, rep.ss_mean, rep.pp_mean, rep.rb_mean, rep.sb_mean,
                "" if rep.rb_mean_success is None else rep.rb_mean_success,
                "" if rep.sb_mean_success is None else rep.sb_mean_success,
                rep.attempted_count, rep.success_count, rep.skipped_count,
            ]
            row.extend("" if b.isr_pct is None else b.isr_pct for b in rep.isr)
            writer.writerow(row)

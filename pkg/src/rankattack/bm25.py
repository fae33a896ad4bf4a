"""Okapi BM25 inverted index and top-k candidate retrieval.

Scoring uses the non-negative IDF variant idf(t) = ln(1 + (N - df + 0.5) /
(df + 0.5)) and the saturated term-frequency form tf * (k1 + 1) / (tf + k1 *
(1 - b + b * dl / avgdl)). Defaults k1 = 0.9, b = 0.4 follow the common
passage-ranking tuning. Results are deterministic: descending score with
ties broken by ascending doc_id, and zero-scoring documents are dropped.
"""

import json
import math
from collections import Counter
from dataclasses import dataclass

from .errors import DataFormatError
from .text import Document, Query


@dataclass
class Bm25Index:
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avg_doc_len: float
    doc_count: int
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if self.doc_count < 1 or self.doc_count != len(self.doc_lengths):
            raise ValueError("doc_count must match the number of indexed documents")
        mean_len = sum(self.doc_lengths.values()) / self.doc_count
        if abs(self.avg_doc_len - mean_len) > 1e-9:
            raise ValueError("avg_doc_len is inconsistent with doc_lengths")
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")
        for term, plist in self.postings.items():
            for doc_id, _tf in plist:
                if doc_id not in self.doc_lengths:
                    raise ValueError(f"postings for {term!r} reference unknown doc {doc_id!r}")

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def build_index(
    corpus: list[Document],
    k1: float = 0.9,
    b: float = 0.4,
    stopwords: set[str] | None = None,
) -> Bm25Index:
    """Build an inverted index over the corpus.

    With a stopword set, those terms are removed from the token stream before
    any statistic is computed; by default nothing is removed.
    """
    if not corpus:
        raise ValueError("cannot index an empty corpus")
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for doc in corpus:
        if doc.doc_id in doc_lengths:
            raise ValueError(f"duplicate doc_id {doc.doc_id!r} in corpus")
        terms = doc.norms()
        if stopwords:
            terms = [t for t in terms if t not in stopwords]
        doc_lengths[doc.doc_id] = len(terms)
        for term, tf in sorted(Counter(terms).items()):
            postings.setdefault(term, []).append((doc.doc_id, tf))
    avg = sum(doc_lengths.values()) / len(doc_lengths)
    return Bm25Index(postings, doc_lengths, avg, len(doc_lengths), k1, b)


def retrieve(q: Query, index: Bm25Index, k: int = 100) -> list[tuple[str, float]]:
    """Top-k documents by Okapi BM25 score for the query.

    Query terms contribute once per occurrence. Returns at most k
    (doc_id, score) pairs, descending by score with ascending doc_id on
    ties; documents scoring zero are excluded, so an unmatched query yields
    an empty list.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    scores: dict[str, float] = {}
    for term in q.norms():
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for doc_id, tf in plist:
            norm = 1.0 - index.b + index.b * index.doc_lengths[doc_id] / index.avg_doc_len
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (index.k1 + 1.0) / (
                tf + index.k1 * norm
            )
    ranked = sorted(
        ((doc_id, s) for doc_id, s in scores.items() if s > 0.0),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


def save_index(index: Bm25Index, path) -> None:
    """Persist the index as deterministic JSON."""
    payload = {
        "k1": index.k1,
        "b": index.b,
        "doc_count": index.doc_count,
        "avg_doc_len": index.avg_doc_len,
        "doc_lengths": index.doc_lengths,
        "postings": {t: [[d, tf] for d, tf in plist] for t, plist in index.postings.items()},
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, separators=(",", ":"))
        handle.write("\n")


def load_index(path) -> Bm25Index:
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as err:
            raise DataFormatError(f"{path}: invalid index file ({err.msg})") from err
    try:
        return Bm25Index(
            postings={t: [(d, int(tf)) for d, tf in plist] for t, plist in payload["postings"].items()},
            doc_lengths={d: int(n) for d, n in payload["doc_lengths"].items()},
            avg_doc_len=float(payload["avg_doc_len"]),
            doc_count=int(payload["doc_count"]),
            k1=float(payload["k1"]),
            b=float(payload["b"]),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise DataFormatError(f"{path}: invalid index file ({err})") from err

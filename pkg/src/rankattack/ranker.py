"""Scoring interface, the reference reranker, and its loss and gradients.

The reference ranker is a differentiable soft term-matching scorer over word
embeddings:

    f(q, d) = sum over in-vocabulary query tokens q_j of
              max over in-vocabulary document positions i of
              w(i) * cos(v(q_j), e_i),      w(i) = 1 / (1 + lambda_pos * i)

where e_i is the stored embedding of the token at 0-based position i and the
position weight w(i) optionally decays so that early positions matter more.
A document with no in-vocabulary token scores 0, and argmax ties resolve to
the smallest position so gradients stay well defined.

To promote a target document d inside a ranked list L, the attack objective
is the pairwise hinge loss

    loss(q, d; L) = sum over competitors d' in L minus {d} of
                    max(0, beta - f(q, d) + f(q, d'))

with competitor scores read from L (they do not depend on d). Its gradient
with respect to each document-position embedding is analytic: only the
f(q, d) term varies, so with A = number of competitors whose hinge term is
strictly positive,

    d loss / d e_i = -A * sum over query tokens whose argmax is i of
                     w(i) * (u_hat - cos * e_hat) / ||e_i||

where u_hat and e_hat are the unit query and document vectors. Positions
never selected as an argmax, and out-of-vocabulary positions, get the zero
vector. A token's importance is the squared Euclidean norm of its gradient.
"""

import abc
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingStore
from .errors import CapabilityError
from .text import Document, Query


@dataclass(frozen=True)
class RankerParams:
    """Reference-ranker knobs: position decay, hinge margin, RNG seed."""

    lambda_pos: float = 0.01
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lambda_pos < 0:
            raise ValueError("lambda_pos must be non-negative")
        if self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class RankEntry:
    doc_id: str
    score: float
    rank: int


class RankedList:
    """An ordered ranking: scores non-increasing, ranks 1-based and dense.

    Score ties are broken by ascending doc_id, so a ranking built from the
    same scores is always identical.
    """

    __slots__ = ("query_id", "entries", "_by_id")

    def __init__(self, query_id: str, entries: Sequence[RankEntry]):
        self.query_id = query_id
        self.entries = tuple(entries)
        self._by_id = {}
        prev: RankEntry | None = None
        for i, entry in enumerate(self.entries):
            if entry.rank != i + 1:
                raise ValueError(f"entry {entry.doc_id!r} has rank {entry.rank}, expected {i + 1}")
            if entry.doc_id in self._by_id:
                raise ValueError(f"duplicate doc_id {entry.doc_id!r} in ranked list")
            if prev is not None:
                if entry.score > prev.score:
                    raise ValueError("scores must be non-increasing with rank")
                if entry.score == prev.score and entry.doc_id < prev.doc_id:
                    raise ValueError("tied scores must be ordered by ascending doc_id")
            self._by_id[entry.doc_id] = entry
            prev = entry

    @classmethod
    def from_scores(cls, query_id: str, scored: Iterable[tuple[str, float]]) -> "RankedList":
        ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0]))
        entries = [RankEntry(doc_id, float(score), i + 1) for i, (doc_id, score) in enumerate(ordered)]
        return cls(query_id, entries)

    def entry(self, doc_id: str) -> RankEntry:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise ValueError(f"doc {doc_id!r} is not in the ranked list") from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TokenGradient:
    """Loss gradient for one document position and its importance score."""

    position: int
    grad: np.ndarray
    importance: float


class Ranker(abc.ABC):
    """Scoring interface for rerankers.

    Implementations must provide `score`; gradient access is an optional
    capability that attacks check via `supports_gradients` before use. This
    keeps the attack code independent of the concrete model, so an adapter
    to an external neural scorer can slot in behind the same contract.
    """

    @abc.abstractmethod
    def score(self, q: Query, d: Document) -> float:
        """Relevance score f(q, d)."""

    @property
    def supports_gradients(self) -> bool:
        return False

    def token_gradients(self, q: Query, d: Document, ranked: RankedList) -> list[TokenGradient]:
        raise CapabilityError(f"{type(self).__name__} does not expose token gradients")

    def rerank(self, q: Query, candidates: Sequence[Document]) -> RankedList:
        """Score every candidate and sort into a RankedList."""
        if not candidates:
            raise ValueError("rerank requires at least one candidate")
        return RankedList.from_scores(q.query_id, ((d.doc_id, self.score(q, d)) for d in candidates))


class ReferenceRanker(Ranker):
    """The built-in differentiable soft term-matching ranker.

    `loss_top_m` optionally restricts the hinge loss (and its gradients) to
    the top-m competitors of the ranked list; by default the sum runs over
    every competitor.
    """

    def __init__(
        self,
        store: EmbeddingStore,
        params: RankerParams | None = None,
        loss_top_m: int | None = None,
    ):
        if loss_top_m is not None and loss_top_m < 1:
            raise ValueError("loss_top_m must be at least 1")
        self.store = store
        self.params = params if params is not None else RankerParams()
        self.loss_top_m = loss_top_m

    def _query_units(self, q: Query) -> np.ndarray:
        rows = [self.store.unit(t.norm) for t in q.tokens if t.norm in self.store]
        if not rows:
            raise ValueError(f"query {q.query_id!r} has no in-vocabulary token")
        return np.vstack(rows)

    def _doc_units(self, d: Document) -> tuple[np.ndarray, np.ndarray]:
        positions = [i for i, t in enumerate(d.tokens) if t.norm in self.store]
        if not positions:
            return np.empty(0, dtype=np.int64), np.empty((0, self.store.dim))
        units = np.vstack([self.store.unit(d.tokens[i].norm) for i in positions])
        return np.asarray(positions, dtype=np.int64), units

    def _weighted_cosines(self, q: Query, d: Document):
        """(positions, weights, weighted cosine matrix) or None for an all-OOV doc."""
        qm = self._query_units(q)
        positions, dm = self._doc_units(d)
        if positions.size == 0:
            return None
        weights = 1.0 / (1.0 + self.params.lambda_pos * positions)
        return positions, weights, (qm @ dm.T) * weights

    def score(self, q: Query, d: Document) -> float:
        table = self._weighted_cosines(q, d)
        if table is None:
            return 0.0
        _, _, weighted = table
        return float(weighted.max(axis=1).sum())

    def _competitors(self, ranked: RankedList, doc_id: str) -> list[RankEntry]:
        others = [e for e in ranked if e.doc_id != doc_id]
        if self.loss_top_m is not None:
            others = others[: self.loss_top_m]
        return others

    def hinge_loss(self, q: Query, d: Document, ranked: RankedList) -> float:
        """Sum of margin violations against every competitor in the list."""
        ranked.entry(d.doc_id)  # d must be in the list
        f = self.score(q, d)
        beta = self.params.beta
        return float(sum(max(0.0, beta - f + e.score) for e in self._competitors(ranked, d.doc_id)))

    @property
    def supports_gradients(self) -> bool:
        return True

    def token_gradients(self, q: Query, d: Document, ranked: RankedList) -> list[TokenGradient]:
        """Analytic hinge-loss gradient per document position.

        Returns one entry per token of d, in position order; OOV positions
        and positions that are no query token's argmax carry zero vectors.
        """
        ranked.entry(d.doc_id)
        grads = np.zeros((len(d.tokens), self.store.dim))
        table = self._weighted_cosines(q, d)
        if table is not None:
            positions, weights, weighted = table
            f = float(weighted.max(axis=1).sum())
            beta = self.params.beta
            active = sum(
                1 for e in self._competitors(ranked, d.doc_id) if beta - f + e.score > 0.0
            )
            if active > 0:
                qm = self._query_units(q)
                argmax_cols = np.argmax(weighted, axis=1)  # first max = smallest position
                for j, col in enumerate(argmax_cols):
                    pos = int(positions[col])
                    token = d.tokens[pos].norm
                    u_hat = qm[j]
                    e_hat = self.store.unit(token)
                    cos = float(u_hat @ e_hat)
                    grad_cos = (u_hat - cos * e_hat) / self.store.vector_norm(token)
                    grads[pos] += -active * weights[col] * grad_cos
        out = []
        for i in range(len(d.tokens)):
            g = grads[i]
            g.setflags(write=False)
            out.append(TokenGradient(position=i, grad=g, importance=float(g @ g)))
        return out

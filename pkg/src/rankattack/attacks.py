"""One-word attack strategies that perturb a document toward a query.

Every strategy edits the target document with a single word and shares one
anchor: the query center, the vocabulary token nearest to the centroid of
the query's in-vocabulary token embeddings. The strategies differ in where
the word goes:

  * one_word_start      - insert the center at the front of the document.
  * one_word_sim        - substitute the in-vocabulary document token most
                          similar to the center (never the center itself).
  * one_word_best_grad  - rank positions by gradient importance, try the
                          center inserted before each of the top-k, keep
                          the edit with the highest score.

Edits record kind, position, the inserted token, and (for substitutes) the
replaced token, so evaluation can reconstruct the perturbed document and
measure the change.
"""

from dataclasses import dataclass

from .embeddings import EmbeddingStore, cosine, query_center
from .errors import CapabilityError, NoCandidateError
from .ranker import RankedList, Ranker
from .text import Document, Query, Token

STRATEGIES = ("one_word_best_grad", "one_word_sim", "one_word_start")


@dataclass(frozen=True)
class Edit:
    """A single-word document edit.

    `kind` is "insert" (token goes before the current token at `position`;
    position may equal the document length to append) or "substitute"
    (token replaces the one at `position`, whose normalized form is kept
    in `replaced`).
    """

    kind: str
    position: int
    token: str
    replaced: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("insert", "substitute"):
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if self.position < 0:
            raise ValueError("edit position must be non-negative")
        if not self.token:
            raise ValueError("edit token must be non-empty")
        if self.kind == "substitute" and not self.replaced:
            raise ValueError("substitute edits must record the replaced token")
        if self.kind == "insert" and self.replaced is not None:
            raise ValueError("insert edits replace nothing")


def apply_edit(d: Document, edit: Edit) -> Document:
    """Return a new document with the edit applied; d is left untouched."""
    tokens = list(d.tokens)
    new = Token(edit.token, edit.token.lower())
    if edit.kind == "insert":
        if edit.position > len(tokens):
            raise ValueError(f"insert position {edit.position} beyond document length {len(tokens)}")
        tokens.insert(edit.position, new)
    else:
        if edit.position >= len(tokens):
            raise ValueError(f"substitute position {edit.position} beyond document length {len(tokens)}")
        if tokens[edit.position].norm != edit.replaced:
            raise ValueError(
                f"edit expects {edit.replaced!r} at position {edit.position}, found {tokens[edit.position].norm!r}"
            )
        tokens[edit.position] = new
    return Document(d.doc_id, tuple(tokens))


def attack_start(q: Query, d: Document, store: EmbeddingStore, ranker: Ranker) -> Edit:
    """Insert the query center as the first token."""
    center = query_center(q, store)
    return Edit(kind="insert", position=0, token=center.token)


def attack_sim(q: Query, d: Document, store: EmbeddingStore, ranker: Ranker) -> Edit:
    """Replace the document token most similar to the query center.

    Only in-vocabulary tokens are candidates, and tokens equal to the center
    are excluded (replacing the center with itself would be a no-op).
    Similarity ties resolve to the smallest position. Raises
    NoCandidateError when no position qualifies.
    """
    center = query_center(q, store)
    center_vec = store[center.token]
    best_pos = -1
    best_sim = float("-inf")
    for i, t in enumerate(d.tokens):
        if t.norm not in store or t.norm == center.token:
            continue
        sim = cosine(store[t.norm], center_vec)
        if sim > best_sim:
            best_sim = sim
            best_pos = i
    if best_pos < 0:
        raise NoCandidateError(f"doc {d.doc_id!r} has no substitutable token for query {q.query_id!r}")
    return Edit(kind="substitute", position=best_pos, token=center.token, replaced=d.tokens[best_pos].norm)


def attack_best_grad(
    q: Query,
    d: Document,
    store: EmbeddingStore,
    ranker: Ranker,
    ranked: RankedList,
    k: int = 20,
) -> Edit:
    """Insert the query center before one of the k most important positions.

    Importance is the squared gradient norm of the ranker's hinge loss at
    each document position (ties toward the smaller position). Each
    candidate insertion is scored with the ranker and the highest-scoring
    edit wins; score ties resolve to the smallest insertion position.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(d.tokens) == 0:
        raise ValueError(f"doc {d.doc_id!r} is empty; no position anchors an insertion")
    if not ranker.supports_gradients:
        raise CapabilityError(f"{type(ranker).__name__} does not expose token gradients")
    center = query_center(q, store)
    gradients = ranker.token_gradients(q, d, ranked)
    by_importance = sorted(gradients, key=lambda g: (-g.importance, g.position))
    best: Edit | None = None
    best_score = float("-inf")
    for g in by_importance[:k]:
        edit = Edit(kind="insert", position=g.position, token=center.token)
        score = ranker.score(q, apply_edit(d, edit))
        if score > best_score or (score == best_score and edit.position < best.position):
            best = edit
            best_score = score
    return best


def run_strategy(
    strategy: str,
    q: Query,
    d: Document,
    store: EmbeddingStore,
    ranker: Ranker,
    ranked: RankedList,
    k: int = 20,
) -> Edit:
    """Dispatch a strategy by its identifier."""
    if strategy == "one_word_start":
        return attack_start(q, d, store, ranker)
    if strategy == "one_word_sim":
        return attack_sim(q, d, store, ranker)
    if strategy == "one_word_best_grad":
        return attack_best_grad(q, d, store, ranker, ranked, k=k)
    raise ValueError(f"unknown strategy {strategy!r}")

"""Word-embedding store and embedding-space semantics.

Houses the vocabulary-to-vector map plus every operation that lives in that
space: cosine similarity, query centroids, the query center (the vocabulary
token nearest the centroid), and the mean-word-embedding document similarity
used as the attack's semantic-drift score.

The store is immutable after construction and safe to share across threads.
Nearest-neighbor lookups are exhaustive scans over a precomputed unit-vector
matrix; at counter-fitted vocabulary sizes (~65k words) a scan takes
milliseconds, so no approximate index is kept.
"""

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataFormatError, NoCenterError
from .text import Document, Query, Token


class EmbeddingStore:
    """Immutable mapping from normalized token to a fixed-dimension vector.

    Every stored vector is finite, non-zero, and exactly `dim` wide. Tokens
    are held sorted so that scans break similarity ties toward the
    lexicographically smallest token.
    """

    def __init__(self, entries: Mapping[str, Sequence[float]], dim: int | None = None):
        if not entries and dim is None:
            raise ValueError("cannot infer dimensionality from an empty store")
        tokens = sorted(entries)
        vectors = []
        for token in tokens:
            vec = np.asarray(entries[token], dtype=np.float64)
            if dim is None:
                dim = int(vec.shape[0]) if vec.ndim == 1 else 0
            if vec.ndim != 1 or vec.shape[0] != dim or dim < 1:
                raise ValueError(f"vector for {token!r} does not have dimensionality {dim}")
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"vector for {token!r} has non-finite components")
            if not np.any(vec):
                raise ValueError(f"vector for {token!r} is all zeros")
            vectors.append(vec)
        self._dim = int(dim)
        self._tokens = tokens
        self._index = {token: i for i, token in enumerate(tokens)}
        if vectors:
            self._matrix = np.vstack(vectors)
        else:
            self._matrix = np.empty((0, self._dim), dtype=np.float64)
        self._norms = np.linalg.norm(self._matrix, axis=1)
        self._units = np.divide(
            self._matrix,
            self._norms[:, None],
            out=np.zeros_like(self._matrix),
            where=self._norms[:, None] > 0,
        )
        self._matrix.setflags(write=False)
        self._units.setflags(write=False)
        self._norms.setflags(write=False)

    @property
    def dim(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __getitem__(self, token: str) -> np.ndarray:
        return self._matrix[self._index[token]]

    def tokens(self) -> list[str]:
        """All vocabulary tokens in lexicographic order."""
        return list(self._tokens)

    def vector_norm(self, token: str) -> float:
        return float(self._norms[self._index[token]])

    def unit(self, token: str) -> np.ndarray:
        """The stored vector scaled to unit length."""
        return self._units[self._index[token]]

    def unit_matrix(self) -> np.ndarray:
        """Read-only (vocab_size, dim) matrix of unit vectors, row i = tokens()[i]."""
        return self._units


def load_embeddings(path) -> EmbeddingStore:
    """Parse a `token v1 v2 ... vdim` per-line embedding file.

    Dimensionality is inferred from the first line; later lines with a
    different arity, non-numeric or non-finite components, or all-zero
    vectors are rejected with their line number. Tokens are lowercased;
    a repeated token keeps its last occurrence.
    """
    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            parts = raw.split()
            if not parts:
                raise DataFormatError(f"{path}: line {lineno}: blank line")
            token, values = parts[0].lower(), parts[1:]
            if dim is None:
                if not values:
                    raise DataFormatError(f"{path}: line {lineno}: no vector components")
                dim = len(values)
            if len(values) != dim:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {dim} components, found {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as err:
                raise DataFormatError(f"{path}: line {lineno}: non-numeric component") from err
            if not np.all(np.isfinite(vec)):
                raise DataFormatError(f"{path}: line {lineno}: non-finite component")
            if not np.any(vec):
                raise DataFormatError(f"{path}: line {lineno}: zero vector for {token!r}")
            entries[token] = vec
    if dim is None:
        raise DataFormatError(f"{path}: empty embedding file")
    return EmbeddingStore(entries, dim=dim)


def cosine(a, b) -> float:
    """Cosine similarity between two equal-length non-zero vectors, in [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1 or va.shape != vb.shape:
        raise ValueError(f"cosine requires equal-length vectors, got {va.shape} and {vb.shape}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for a zero-norm vector")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def centroid(tokens: Iterable[Token], store: EmbeddingStore) -> np.ndarray | None:
    """Arithmetic mean of the raw vectors of in-vocabulary tokens.

    Out-of-vocabulary tokens are ignored; duplicated tokens count once per
    occurrence. Returns None when no token is in the vocabulary.
    """
    vectors = [store[t.norm] for t in tokens if t.norm in store]
    if not vectors:
        return None
    return np.mean(vectors, axis=0)


def nearest_token(v, store: EmbeddingStore) -> tuple[str, float]:
    """The vocabulary token whose vector maximizes cosine similarity to v.

    Exact ties go to the lexicographically smallest token.
    """
    if len(store) == 0:
        raise ValueError("nearest_token over an empty store")
    vec = np.asarray(v, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != store.dim:
        raise ValueError(f"expected a vector of length {store.dim}")
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValueError("nearest_token is undefined for a zero-norm vector")
    sims = store.unit_matrix() @ (vec / norm)
    best = int(np.argmax(sims))  # tokens are sorted, so first max = smallest token
    token = store.tokens()[best]
    return token, cosine(store[token], vec)


@dataclass(frozen=True)
class QueryCenter:
    """The vocabulary token nearest the query centroid, with its similarity."""

    token: str
    centroid: np.ndarray
    similarity: float


def query_center(q: Query, store: EmbeddingStore) -> QueryCenter:
    """Compute the query center: centroid of in-vocabulary query tokens,
    then the nearest vocabulary token to that centroid.

    The search runs over the full vocabulary, so a query's own term may be
    its center. Raises NoCenterError when every query token is OOV.
    """
    center_of_mass = centroid(q.tokens, store)
    if center_of_mass is None:
        raise NoCenterError(f"query {q.query_id!r}: no token in the embedding vocabulary")
    center_of_mass.setflags(write=False)
    token, similarity = nearest_token(center_of_mass, store)
    return QueryCenter(token=token, centroid=center_of_mass, similarity=similarity)


def document_similarity(a: Document, b: Document, store: EmbeddingStore) -> float:
    """Cosine between the two documents' mean word embeddings, clamped to [0, 1].

    The mean runs over in-vocabulary tokens only; a document with none is an
    error. Order-invariant, so identical token multisets always score 1.
    """
    means = []
    for doc in (a, b):
        mean = centroid(doc.tokens, store)
        if mean is None:
            raise ValueError(f"document {doc.doc_id!r} has no in-vocabulary token")
        means.append(mean)
    return max(0.0, cosine(means[0], means[1]))

"""Shared construction helpers for the test suite."""

import numpy as np

from rankattack import Document, EmbeddingStore, Query, Token


def toks(words):
    return tuple(Token(w, w.lower()) for w in words)


def make_doc(doc_id, words):
    return Document(doc_id, toks(words))


def make_query(query_id, words):
    return Query(query_id, toks(words))


def random_store(rng, n_words, dim, prefix="w"):
    """A store of seeded Gaussian vectors plus its vocabulary list."""
    vocab = [f"{prefix}{i:04d}" for i in range(n_words)]
    return EmbeddingStore({w: rng.normal(size=dim) for w in vocab}), vocab

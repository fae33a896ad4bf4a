"""Tokenization and flat-file ingestion of corpora and query sets.

Tokens are produced by lowercasing and splitting on maximal runs of
non-alphanumeric characters. No stemming or stopword removal happens here;
downstream modules count and index these surface-level tokens directly.
"""

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import DataFormatError

# Maximal runs of alphanumeric characters (underscore is a separator).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

CORPUS_FORMATS = ("tsv", "jsonl")


@dataclass(frozen=True)
class Token:
    """A text fragment paired with its lowercased normalized form."""

    surface: str
    norm: str

    def __post_init__(self) -> None:
        if not self.norm or any(c.isspace() for c in self.norm):
            raise ValueError(f"invalid token norm: {self.norm!r}")


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def norms(self) -> list[str]:
        return [t.norm for t in self.tokens]


@dataclass(frozen=True)
class Query:
    query_id: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError(f"query {self.query_id!r} has no tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    def norms(self) -> list[str]:
        return [t.norm for t in self.tokens]


def tokenize(text: str) -> list[Token]:
    """Split text into tokens, preserving order.

    Splits on any maximal run of non-alphanumeric characters and lowercases
    each fragment; empty input yields an empty list.
    """
    return [Token(m.group(0), m.group(0).lower()) for m in _TOKEN_RE.finditer(text)]


def _read_lines(path):
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            yield lineno, raw.rstrip("\n").rstrip("\r")


def _split_tsv(path, line: str, lineno: int) -> tuple[str, str]:
    if "\t" not in line:
        raise DataFormatError(f"{path}: line {lineno}: expected id<TAB>text")
    record_id, text = line.split("\t", 1)
    if not record_id:
        raise DataFormatError(f"{path}: line {lineno}: empty id field")
    return record_id, text


def load_corpus(path, format: str = "tsv") -> list[Document]:
    """Load one Document per record from a TSV or JSONL file.

    TSV rows are `doc_id<TAB>text`; JSONL rows are objects with string
    fields `id` and `contents`. Duplicate doc_ids and malformed lines are
    rejected with the offending id or line number.
    """
    if format not in CORPUS_FORMATS:
        raise ValueError(f"unknown corpus format {format!r}, expected one of {CORPUS_FORMATS}")
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, line in _read_lines(path):
        if format == "tsv":
            doc_id, text = _split_tsv(path, line, lineno)
        else:
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise DataFormatError(f"{path}: line {lineno}: invalid JSON ({err.msg})") from err
            if not isinstance(record, dict):
                raise DataFormatError(f"{path}: line {lineno}: expected a JSON object")
            doc_id = record.get("id")
            text = record.get("contents")
            if not isinstance(doc_id, str) or not isinstance(text, str):
                raise DataFormatError(
                    f"{path}: line {lineno}: object must have string fields 'id' and 'contents'"
                )
            if not doc_id:
                raise DataFormatError(f"{path}: line {lineno}: empty id field")
        if doc_id in seen:
            raise DataFormatError(f"{path}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        docs.append(Document(doc_id, tuple(tokenize(text))))
    return docs


def load_queries(path) -> list[Query]:
    """Load queries from a TSV file of `query_id<TAB>text` rows.

    A query that tokenizes to zero tokens is an error, as are duplicate ids.
    """
    queries: list[Query] = []
    seen: set[str] = set()
    for lineno, line in _read_lines(path):
        query_id, text = _split_tsv(path, line, lineno)
        if query_id in seen:
            raise DataFormatError(f"{path}: duplicate query_id {query_id!r}")
        seen.add(query_id)
        tokens = tokenize(text)
        if not tokens:
            raise DataFormatError(
                f"{path}: line {lineno}: query {query_id!r} tokenizes to zero tokens"
            )
        queries.append(Query(query_id, tuple(tokens)))
    return queries


def infer_corpus_format(path) -> str:
    """Guess the corpus format from the file suffix (.jsonl -> jsonl, else tsv)."""
    return "jsonl" if Path(path).suffix.lower() == ".jsonl" else "tsv"

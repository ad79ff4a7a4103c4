"""Sparse TF-IDF vectors with unit Euclidean norm.

The weight of word i in document j is its raw count multiplied by
ln(n/df_i), where n is the number of training documents and df_i the
number of them containing word i; the formula is implemented verbatim,
with no smoothing, so a word present in every document weighs zero and
drops out of the vector. Each non-empty vector is then scaled to norm 1,
so document length stops mattering.

The IDF table is fitted on the training split only and frozen; validation,
test, and serving documents reuse it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .textprep import TokenSequence, Vocabulary


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted (index, weight) pairs; zero weights are never stored."""

    indices: np.ndarray  # int64, strictly increasing
    weights: np.ndarray  # float64, all > 0

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights must have equal length")
        if len(self.indices) > 1 and not np.all(np.diff(self.indices) > 0):
            raise ValueError("indices must be strictly increasing")
        if len(self.weights) and not np.all(self.weights > 0):
            raise ValueError("weights must be positive (zeros are omitted)")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        pairs = list(pairs)
        idx = np.array([i for i, _ in pairs], dtype=np.int64)
        val = np.array([w for _, w in pairs], dtype=np.float64)
        return cls(idx, val)

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    @property
    def entries(self) -> list[tuple[int, float]]:
        return [(int(i), float(w)) for i, w in zip(self.indices, self.weights)]

    def __len__(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def dot_dense(self, dense: np.ndarray) -> float:
        """Dot product against a dense vector indexed by word id."""
        if len(self.indices) == 0:
            return 0.0
        return float(np.dot(dense[self.indices], self.weights))

    def to_dense(self, size: int) -> np.ndarray:
        out = np.zeros(size, dtype=np.float64)
        out[self.indices] = self.weights
        return out


@dataclass(frozen=True, eq=False)
class IdfTable:
    """Per-word ln(n/df) values, aligned with the vocabulary index."""

    n_docs: int
    values: np.ndarray  # float64

    def __post_init__(self) -> None:
        if len(self.values) and float(self.values.min()) < 0:
            raise ValueError("idf values must be non-negative")


def term_frequencies(doc: TokenSequence, vocab: Vocabulary) -> SparseVector:
    """Raw in-document counts; words absent from the vocabulary are dropped."""
    counts: dict[int, int] = {}
    for tok in doc:
        idx = vocab.get(tok)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector.empty()
    items = sorted(counts.items())
    idx = np.array([i for i, _ in items], dtype=np.int64)
    val = np.array([c for _, c in items], dtype=np.float64)
    return SparseVector(idx, val)


def build_idf(vocab: Vocabulary, n_docs: int) -> IdfTable:
    """idf_i = ln(n_docs / df_i), natural log, no smoothing."""
    df = vocab.doc_freq
    if len(df) and int(df.min()) <= 0:
        raise ValueError("corrupt vocabulary: document frequency of zero")
    if len(df) and int(df.max()) > n_docs:
        raise ValueError(
            f"document frequency exceeds corpus size ({int(df.max())} > {n_docs})"
        )
    if len(df) == 0:
        return IdfTable(n_docs, np.empty(0, dtype=np.float64))
    values = np.log(float(n_docs) / df.astype(np.float64))
    # ln(n/n) can come out as -0.0; normalize so idf == 0 exactly when df == n
    values[df == n_docs] = 0.0
    return IdfTable(n_docs, values)


def tfidf_normalize(tf: SparseVector, idf: IdfTable) -> SparseVector:
    """Scale counts by IDF, drop zero weights, divide by the Euclidean norm."""
    if len(tf) == 0:
        return tf
    weights = tf.weights * idf.values[tf.indices]
    keep = weights > 0
    if not keep.any():
        return SparseVector.empty()
    indices = tf.indices[keep]
    weights = weights[keep]
    norm = math.sqrt(float(np.dot(weights, weights)))
    return SparseVector(indices, weights / norm)


def vectorize_tokens(doc: TokenSequence, vocab: Vocabulary, idf: IdfTable) -> SparseVector:
    """normalize() output -> unit-norm TF-IDF vector, in one call."""
    return tfidf_normalize(term_frequencies(doc, vocab), idf)


def vectorize_corpus(
    docs: Sequence[TokenSequence], vocab: Vocabulary, idf: IdfTable
) -> list[SparseVector]:
    return [vectorize_tokens(doc, vocab, idf) for doc in docs]

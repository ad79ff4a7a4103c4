"""Splitting labeled data and measuring suggestion quality.

The split is a seeded uniform shuffle followed by contiguous cuts at
70/15/15. Sizes are fixed by rounding half-up on the train and validation
fractions, with the test split taking the remainder, so the three sizes
always sum to the corpus size and the same seed always produces the same
membership.

Quality is reported as top-k accuracy (true class anywhere in the first k
suggestions) plus a per-class table of misclassification rates under the
top-1 decision, and the correlation between how often a class occurs and
how often it is missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TypeVar

import numpy as np

from .model import MulticlassModel
from .records import LabeledDocument

T = TypeVar("T")

MIN_SPLIT_SIZE = 10
TRAIN_FRACTION = 0.70
VALIDATION_FRACTION = 0.15


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Split:
    train: tuple
    validation: tuple
    test: tuple


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(items: Sequence[T], seed: int) -> Split:
    """Shuffle with the given seed, then cut 70/15/15 in order."""
    n = len(items)
    if n < MIN_SPLIT_SIZE:
        raise EvaluationError(f"need at least {MIN_SPLIT_SIZE} documents to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_train = round_half_up(TRAIN_FRACTION * n)
    n_val = round_half_up(VALIDATION_FRACTION * n)
    shuffled = [items[i] for i in order]
    return Split(
        train=tuple(shuffled[:n_train]),
        validation=tuple(shuffled[n_train : n_train + n_val]),
        test=tuple(shuffled[n_train + n_val :]),
    )


def rank_documents(
    model: MulticlassModel, docs: Sequence[LabeledDocument]
) -> list[list[str]]:
    """Class codes in suggestion order (best first) for each document."""
    rankings = []
    for doc in docs:
        dist = model.distribution_for_text(doc.text)
        rankings.append([code for code, _ in dist.ranked()])
    return rankings


def top_k_accuracy(
    rankings: Sequence[Sequence[str]], truths: Sequence[str], k: int
) -> float:
    if k < 1:
        raise EvaluationError("k must be at least 1")
    if len(rankings) != len(truths):
        raise EvaluationError("rankings and truths differ in length")
    if not truths:
        raise EvaluationError("no documents to evaluate")
    hits = sum(1 for ranked, truth in zip(rankings, truths) if truth in ranked[:k])
    return hits / len(truths)


@dataclass(frozen=True)
class ClassReport:
    class_code: str
    frequency: int
    misclassified: int

    @property
    def rate(self) -> float:
        return self.misclassified / self.frequency


def per_class_rates(
    rankings: Sequence[Sequence[str]], truths: Sequence[str]
) -> list[ClassReport]:
    """Top-1 misclassification rate per class, ascending class code.

    Frequency counts occurrences in the evaluated documents, so every row
    has frequency at least one and the rate is always defined.
    """
    freq: dict[str, int] = {}
    missed: dict[str, int] = {}
    for ranked, truth in zip(rankings, truths):
        freq[truth] = freq.get(truth, 0) + 1
        if not ranked or ranked[0] != truth:
            missed[truth] = missed.get(truth, 0) + 1
    return [
        ClassReport(code, freq[code], missed.get(code, 0)) for code in sorted(freq)
    ]


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Pearson correlation, or None when it is undefined.

    Undefined means fewer than three points or zero variance on either
    axis; callers render that as null rather than guessing.
    """
    if len(xs) != len(ys):
        raise EvaluationError("correlation inputs differ in length")
    n = len(xs)
    if n < 3:
        return None
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    # constant axis = zero variance; test exactly on the values, because the
    # centered sum of squares of a constant vector is rounding noise, not 0
    if float(x.max()) == float(x.min()) or float(y.max()) == float(y.min()):
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(np.dot(dx, dy) / math.sqrt(sxx * syy))


@dataclass(frozen=True)
class EvaluationReport:
    n_documents: int
    accuracies: dict[int, float]
    per_class: tuple[ClassReport, ...]
    frequency_rate_correlation: float | None

    def as_dict(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "top_k_accuracy": {str(k): v for k, v in sorted(self.accuracies.items())},
            "per_class": [
                {
                    "class": r.class_code,
                    "frequency": r.frequency,
                    "misclassified": r.misclassified,
                    "rate": r.rate,
                }
                for r in self.per_class
            ],
            "frequency_rate_correlation": self.frequency_rate_correlation,
        }


def evaluate_model(
    model: MulticlassModel, docs: Sequence[LabeledDocument], max_k: int = 5
) -> EvaluationReport:
    if not docs:
        raise EvaluationError("no documents to evaluate")
    truths = [d.class_code for d in docs]
    rankings = rank_documents(model, docs)
    ks = range(1, min(max_k, len(model.classes)) + 1)
    accuracies = {k: top_k_accuracy(rankings, truths, k) for k in ks}
    table = per_class_rates(rankings, truths)
    corr = pearson([r.frequency for r in table], [r.rate for r in table])
    return EvaluationReport(
        n_documents=len(docs),
        accuracies=accuracies,
        per_class=tuple(table),
        frequency_rate_correlation=corr,
    )

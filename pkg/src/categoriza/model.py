"""The trained multiclass model: one object from raw text to suggestions.

Training wires the stages together in a fixed order: normalize the
training documents, build the vocabulary and inverse document frequencies
from them alone, vectorize, train one linear classifier per class pair,
then calibrate each pair's decision values into probabilities. Prediction
reverses the path: normalize, vectorize against the frozen vocabulary,
score every pair, couple into a distribution, rank.

Classes rarer than ``min_class_count`` in the training documents are
dropped before any training happens (and logged); five-fold calibration
needs enough samples per class to stratify.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .calibration import (
    CalibratedPair,
    ClassDistribution,
    calibrate_pairs,
    predict_distribution,
)
from .records import LabeledDocument
from .svm import (
    DEFAULT_MIN_CLASS_COUNT,
    DegenerateProblemError,
    TrainConfig,
    eligible_classes,
    train_one_vs_one,
)
from .textprep import Vocabulary, build_vocabulary, normalize
from .vectorize import IdfTable, SparseVector, build_idf, vectorize_tokens

log = logging.getLogger(__name__)

DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class Suggestion:
    class_code: str
    probability: float


@dataclass(frozen=True)
class SuggestResult:
    suggestions: tuple[Suggestion, ...]
    fallback: bool


@dataclass(frozen=True)
class MulticlassModel:
    """Everything needed to serve predictions, and nothing else."""

    vocabulary: Vocabulary
    idf: IdfTable
    classes: tuple[str, ...]
    pairs: tuple[CalibratedPair, ...]
    config: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if list(self.classes) != sorted(self.classes):
            raise ValueError("classes must be sorted ascending")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate class codes")
        expected = len(self.classes) * (len(self.classes) - 1) // 2
        if len(self.pairs) != expected:
            raise ValueError(
                f"expected {expected} pair models for {len(self.classes)} classes, "
                f"got {len(self.pairs)}"
            )

    def vectorize_text(self, text: str) -> SparseVector:
        tokens = normalize(text)
        return vectorize_tokens(tokens, self.vocabulary, self.idf)

    def distribution(self, x: SparseVector) -> ClassDistribution:
        return predict_distribution(self, x)

    def distribution_for_text(self, text: str) -> ClassDistribution:
        return self.distribution(self.vectorize_text(text))

    def suggest(self, text: str, k: int = 3) -> SuggestResult:
        """Top-k suggestions, highest probability first.

        ``fallback`` is set when the text shares no vocabulary with the
        training corpus: the ranking then rests on the pair biases alone
        rather than on anything in the description.
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        x = self.vectorize_text(text)
        dist = self.distribution(x)
        top = dist.top(k)
        return SuggestResult(
            suggestions=tuple(Suggestion(code, p) for code, p in top),
            fallback=len(x) == 0,
        )


def train_model(
    docs: Sequence[LabeledDocument],
    cfg: TrainConfig | None = None,
    min_class_count: int = DEFAULT_MIN_CLASS_COUNT,
    folds: int = DEFAULT_FOLDS,
) -> MulticlassModel:
    """Train on labeled documents (the training split only, by contract)."""
    cfg = cfg or TrainConfig()
    if min_class_count < folds:
        raise ValueError(
            f"min_class_count {min_class_count} cannot support {folds}-fold calibration"
        )
    labels = [d.class_code for d in docs]
    kept_classes, dropped = eligible_classes(labels, min_class_count)
    if dropped:
        log.warning(
            "dropping %d class(es) with fewer than %d training documents: %s",
            len(dropped), min_class_count, ", ".join(dropped),
        )
    if len(kept_classes) < 2:
        raise DegenerateProblemError(
            "need at least two classes meeting the minimum document count"
        )
    kept_set = set(kept_classes)
    kept_docs = [d for d in docs if d.class_code in kept_set]

    tokenized = [normalize(d.text) for d in kept_docs]
    vocab = build_vocabulary(tokenized)
    idf = build_idf(vocab, len(kept_docs))
    X = [vectorize_tokens(tokens, vocab, idf) for tokens in tokenized]
    kept_labels = [d.class_code for d in kept_docs]

    classifiers = train_one_vs_one(
        X, kept_labels, cfg, n_features=len(vocab), min_class_count=min_class_count
    )
    pairs = calibrate_pairs(
        X, kept_labels, classifiers, cfg, folds=folds, n_features=len(vocab)
    )
    config_echo = {
        "C": cfg.C,
        "max_epochs": cfg.max_epochs,
        "dual_gap_tol": cfg.dual_gap_tol,
        "seed": cfg.seed,
        "min_class_count": min_class_count,
        "folds": folds,
    }
    return MulticlassModel(
        vocabulary=vocab,
        idf=idf,
        classes=tuple(kept_classes),
        pairs=tuple(pairs),
        config=config_echo,
    )


def predict_batch(
    model: MulticlassModel, texts: Iterable[str], k: int = 3
) -> list[SuggestResult]:
    return [model.suggest(t, k) for t in texts]

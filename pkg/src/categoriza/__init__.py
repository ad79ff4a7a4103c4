"""Suggest 4-digit classification codes for free-text purchase descriptions.

The pipeline: normalize Portuguese text, weight terms by TF-IDF against a
frozen training vocabulary, score every pair of classes with a linear
classifier, calibrate the scores into probabilities, and couple them into
one ranked distribution over all classes.
"""

from .calibration import (
    CalibratedPair,
    CalibrationError,
    ClassDistribution,
    SigmoidParams,
    couple,
    fit_sigmoid,
    predict_distribution,
)
from .evaluate import (
    EvaluationError,
    EvaluationReport,
    Split,
    evaluate_model,
    pearson,
    split,
    top_k_accuracy,
)
from .model import MulticlassModel, Suggestion, SuggestResult, train_model
from .persist import PersistError, load_model, model_version, save_model
from .records import (
    IngestError,
    IngestStats,
    LabeledDocument,
    RawRecord,
    RecordError,
    load_labeled,
    read_records,
)
from .svm import (
    BinaryLinearClassifier,
    DegenerateProblemError,
    TrainConfig,
    solve_dual,
    train_binary,
    train_one_vs_one,
)
from .textprep import (
    EmptyCorpusError,
    Vocabulary,
    build_vocabulary,
    normalize,
    singularize,
)
from .vectorize import (
    IdfTable,
    SparseVector,
    build_idf,
    term_frequencies,
    tfidf_normalize,
    vectorize_corpus,
    vectorize_tokens,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryLinearClassifier",
    "CalibratedPair",
    "CalibrationError",
    "ClassDistribution",
    "DegenerateProblemError",
    "EmptyCorpusError",
    "EvaluationError",
    "EvaluationReport",
    "IdfTable",
    "IngestError",
    "IngestStats",
    "LabeledDocument",
    "MulticlassModel",
    "PersistError",
    "RawRecord",
    "RecordError",
    "SigmoidParams",
    "SparseVector",
    "Split",
    "SuggestResult",
    "Suggestion",
    "TrainConfig",
    "Vocabulary",
    "build_idf",
    "build_vocabulary",
    "couple",
    "evaluate_model",
    "fit_sigmoid",
    "load_labeled",
    "load_model",
    "model_version",
    "normalize",
    "pearson",
    "predict_distribution",
    "read_records",
    "save_model",
    "singularize",
    "solve_dual",
    "split",
    "term_frequencies",
    "tfidf_normalize",
    "top_k_accuracy",
    "train_binary",
    "train_model",
    "train_one_vs_one",
    "vectorize_corpus",
    "vectorize_tokens",
    "__version__",
]

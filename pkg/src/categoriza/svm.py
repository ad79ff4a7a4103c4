"""L2-regularized hinge-loss linear classifiers trained by dual coordinate
descent, composed one-vs-one for multiclass.

The bias is handled as an implicit constant feature regularized together
with the weights, which keeps the dual box-constrained (no equality
constraint) so plain coordinate descent applies:

    min_{w,b}  (1/2)(||w||^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b))

Each dual coordinate update is the exact box-clipped Newton step; the
solver stops when the relative duality gap drops below the configured
tolerance or the epoch budget runs out. The gap is tracked as a running
certificate (best primal value seen minus best dual value seen), which is
non-increasing by construction, and the returned weights are the iterate
that achieved the best primal value, so the certificate applies to the
solution actually handed back. Samples are visited in a freshly shuffled
order every epoch, driven by a seeded generator, and the input is first
sorted into a canonical order, so reruns (and input permutations)
reproduce the learned weights bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from numba import njit

from .vectorize import SparseVector

log = logging.getLogger(__name__)

DEFAULT_MIN_CLASS_COUNT = 10


class DegenerateProblemError(ValueError):
    """Training set does not contain both label signs."""


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    max_epochs: int = 1000
    dual_gap_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.dual_gap_tol > 0:
            raise ValueError(f"dual_gap_tol must be positive, got {self.dual_gap_tol}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {self.max_epochs}")


@dataclass(frozen=True, eq=False)
class BinaryLinearClassifier:
    """Dense weights over the vocabulary plus a bias, for one class pair."""

    weights: np.ndarray  # float64, length = vocabulary size
    bias: float
    positive_class: str
    negative_class: str

    def decision_value(self, x: SparseVector) -> float:
        return x.dot_dense(self.weights) + self.bias


@dataclass
class GapCheck:
    """Optimality certificate at one check: the best primal objective value
    and the best dual objective value seen so far."""

    primal: float
    dual: float

    @property
    def gap(self) -> float:
        return self.primal - self.dual

    @property
    def relative_gap(self) -> float:
        return (self.primal - self.dual) / max(self.primal, 1e-300)


@dataclass
class DualSolution:
    """Solver output plus the diagnostics the contract tests inspect.

    weights/bias are the iterate with the lowest primal objective, alpha the
    iterate with the highest dual objective; gap_history pairs those running
    bounds per epoch, so its gap never grows.
    """

    weights: np.ndarray
    bias: float
    alpha: np.ndarray
    epochs: int
    converged: bool
    gap_history: list[GapCheck] = field(default_factory=list)


@njit(cache=True)
def _cd_epoch(data, indices, indptr, y, qdiag, alpha, w, b, C, order):
    """One pass of exact coordinate updates over `order`; returns the bias."""
    for k in range(order.shape[0]):
        i = order[k]
        lo, hi = indptr[i], indptr[i + 1]
        f = b
        for p in range(lo, hi):
            f += w[indices[p]] * data[p]
        g = y[i] * f - 1.0
        a_new = alpha[i] - g / qdiag[i]
        if a_new < 0.0:
            a_new = 0.0
        elif a_new > C:
            a_new = C
        d = (a_new - alpha[i]) * y[i]
        if d != 0.0:
            alpha[i] = a_new
            for p in range(lo, hi):
                w[indices[p]] += d * data[p]
            b += d
    return b


def _canonical_order(X: sp.csr_matrix, y: np.ndarray) -> np.ndarray:
    """Sort rows by (label, structure, values) so input order cannot leak
    into the arithmetic: any permutation of the same multiset of samples
    trains through the identical float sequence."""
    keys = []
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        keys.append((y[i], X.indices[lo:hi].tobytes(), X.data[lo:hi].tobytes()))
    return np.array(sorted(range(X.shape[0]), key=keys.__getitem__), dtype=np.int64)


def _objectives(X: sp.csr_matrix, y: np.ndarray, w: np.ndarray, b: float,
                alpha: np.ndarray, C: float) -> GapCheck:
    scores = X @ w + b
    hinge = np.maximum(0.0, 1.0 - y * scores)
    reg = 0.5 * (float(np.dot(w, w)) + b * b)
    primal = reg + C * float(hinge.sum())
    dual = float(alpha.sum()) - reg
    return GapCheck(primal, dual)


def solve_dual(X: sp.csr_matrix, y: np.ndarray, cfg: TrainConfig) -> DualSolution:
    """Run dual coordinate descent on a CSR matrix with +1/-1 labels."""
    n, n_features = X.shape
    y = np.asarray(y, dtype=np.float64)
    if not ((y > 0).any() and (y < 0).any()):
        raise DegenerateProblemError("degenerate binary problem: single-sign labels")

    order0 = _canonical_order(X, y)
    X = sp.csr_matrix(X[order0])
    y = y[order0]
    X.sort_indices()

    row_sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
    qdiag = row_sq + 1.0  # +1 for the implicit bias feature
    alpha = np.zeros(n, dtype=np.float64)
    w = np.zeros(n_features, dtype=np.float64)
    b = 0.0

    rng = np.random.default_rng(cfg.seed)
    history: list[GapCheck] = []
    converged = False
    epochs = 0
    data = X.data.astype(np.float64, copy=False)
    best_primal = np.inf
    best_dual = -np.inf
    best_w, best_b, best_alpha = w.copy(), 0.0, alpha.copy()
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(n)
        b = _cd_epoch(data, X.indices, X.indptr, y, qdiag, alpha, w, b,
                      float(cfg.C), order)
        epochs = epoch + 1
        raw = _objectives(X, y, w, b, alpha, cfg.C)
        if raw.primal < best_primal:
            best_primal, best_w, best_b = raw.primal, w.copy(), b
        if raw.dual > best_dual:
            best_dual, best_alpha = raw.dual, alpha.copy()
        check = GapCheck(best_primal, best_dual)
        history.append(check)
        if check.relative_gap <= cfg.dual_gap_tol:
            converged = True
            break
    return DualSolution(best_w, float(best_b), best_alpha, epochs, converged,
                        history)


def _vectors_to_csr(X: Sequence[SparseVector], n_features: int) -> sp.csr_matrix:
    indptr = np.zeros(len(X) + 1, dtype=np.int64)
    for i, v in enumerate(X):
        indptr[i + 1] = indptr[i] + len(v)
    indices = np.concatenate([v.indices for v in X]) if X else np.empty(0, dtype=np.int64)
    data = np.concatenate([v.weights for v in X]) if X else np.empty(0, dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(X), n_features))


def _infer_dim(X: Sequence[SparseVector]) -> int:
    dims = [int(v.indices[-1]) + 1 for v in X if len(v)]
    return max(dims) if dims else 0


def train_binary(
    X: Sequence[SparseVector],
    y: Sequence[int],
    cfg: TrainConfig,
    positive_class: str = "0001",
    negative_class: str = "0002",
    n_features: int | None = None,
) -> BinaryLinearClassifier:
    """Train one hinge-loss classifier; labels are +1/-1."""
    if n_features is None:
        n_features = _infer_dim(X)
    solution = solve_dual(_vectors_to_csr(X, n_features), np.asarray(y), cfg)
    return BinaryLinearClassifier(solution.weights, solution.bias,
                                  positive_class, negative_class)


def class_pairs(classes: Iterable[str]) -> list[tuple[str, str]]:
    """All unordered pairs in ascending-code order: k classes -> k(k-1)/2."""
    ordered = sorted(set(classes))
    return [(a, b) for i, a in enumerate(ordered) for b in ordered[i + 1:]]


def eligible_classes(
    labels: Sequence[str], min_class_count: int = DEFAULT_MIN_CLASS_COUNT
) -> tuple[list[str], list[str]]:
    """Split class codes into (kept, dropped) by training-sample count."""
    counts: dict[str, int] = {}
    for code in labels:
        counts[code] = counts.get(code, 0) + 1
    kept = sorted(c for c, n in counts.items() if n >= min_class_count)
    dropped = sorted(c for c, n in counts.items() if n < min_class_count)
    return kept, dropped


def train_one_vs_one(
    X: Sequence[SparseVector],
    labels: Sequence[str],
    cfg: TrainConfig,
    n_features: int | None = None,
    min_class_count: int = DEFAULT_MIN_CLASS_COUNT,
) -> list[BinaryLinearClassifier]:
    """Train one classifier per unordered class pair, independently.

    The lexicographically smaller code of each pair is the +1 side. Classes
    with fewer than min_class_count samples are dropped (logged), because
    they cannot supply stratified cross-validation folds downstream.
    """
    if n_features is None:
        n_features = _infer_dim(X)
    kept, dropped = eligible_classes(labels, min_class_count)
    if dropped:
        log.warning(
            "dropping %d class(es) below %d samples: %s",
            len(dropped), min_class_count, ", ".join(dropped),
        )
    if len(kept) < 2:
        raise DegenerateProblemError(
            f"need at least 2 trainable classes, have {len(kept)}"
        )
    by_class: dict[str, list[int]] = {c: [] for c in kept}
    for i, code in enumerate(labels):
        if code in by_class:
            by_class[code].append(i)

    classifiers = []
    for pos, neg in class_pairs(kept):
        rows = by_class[pos] + by_class[neg]
        pair_X = [X[i] for i in rows]
        pair_y = [1] * len(by_class[pos]) + [-1] * len(by_class[neg])
        classifiers.append(
            train_binary(pair_X, pair_y, cfg, pos, neg, n_features=n_features)
        )
    return classifiers


def decision_values(
    classifiers: Sequence[BinaryLinearClassifier], x: SparseVector
) -> dict[tuple[str, str], float]:
    """Raw f(x) per class pair; an empty vector yields each pair's bias."""
    return {
        (clf.positive_class, clf.negative_class): clf.decision_value(x)
        for clf in classifiers
    }

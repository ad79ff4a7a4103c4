"""Turning raw decision values into class probabilities.

Two stages. First, each pair classifier gets a sigmoid

    p(f) = 1 / (1 + exp(A*f + B))

fitted to decision values produced by stratified five-fold
cross-validation, so every score the fit sees comes from a model that
never trained on that sample. The fit minimizes the negative
log-likelihood with smoothed targets t+ = (N+ + 1)/(N+ + 2) and
t- = 1/(N- + 2) by Newton's method with backtracking line search.

Second, the per-pair probabilities r_ij are coupled into one distribution
over all classes by minimizing

    sum_i sum_{j != i} (r_ji p_i - r_ij p_j)^2   s.t.  p >= 0, sum p = 1

via a fixed-point sweep (Gauss-Seidel component updates, renormalized
after each sweep, starting from the uniform distribution).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .svm import BinaryLinearClassifier, TrainConfig, solve_dual, _vectors_to_csr
from .vectorize import SparseVector

if TYPE_CHECKING:  # pragma: no cover
    from .model import MulticlassModel

log = logging.getLogger(__name__)

SIGMOID_GRAD_TOL = 1e-10
SIGMOID_MAX_ITER = 100
COUPLE_TOL = 1e-10
COUPLE_MAX_ITER = 10_000


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class SigmoidParams:
    """Platt sigmoid coefficients for one class pair."""

    A: float
    B: float

    def probability(self, f: float) -> float:
        """P(positive side | decision value f), numerically stable."""
        z = self.A * f + self.B
        if z >= 0:
            e = math.exp(-z)
            return e / (1.0 + e)
        return 1.0 / (1.0 + math.exp(z))


@dataclass(frozen=True)
class CalibratedPair:
    """A trained pair classifier together with its fitted sigmoid."""

    classifier: BinaryLinearClassifier
    sigmoid: SigmoidParams

    @property
    def positive_class(self) -> str:
        return self.classifier.positive_class

    @property
    def negative_class(self) -> str:
        return self.classifier.negative_class


@dataclass(frozen=True)
class ClassDistribution:
    """Probabilities over class codes: non-negative, summing to one."""

    probs: dict[str, float]

    def __post_init__(self) -> None:
        total = sum(self.probs.values())
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative probability")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def ranked(self) -> list[tuple[str, float]]:
        """Descending probability; ties broken by ascending class code."""
        return sorted(self.probs.items(), key=lambda kv: (-kv[1], kv[0]))

    def top(self, k: int) -> list[tuple[str, float]]:
        return self.ranked()[:k]


def stratified_folds(labels: Sequence[int], folds: int, seed: int) -> np.ndarray:
    """Assign each sample a fold id in [0, folds), stratified by label.

    Within each label group the samples are shuffled by a seeded generator
    and dealt out round-robin, so every fold sees both labels.
    """
    labels = np.asarray(labels)
    fold_of = np.empty(len(labels), dtype=np.int64)
    rng = np.random.default_rng(seed)
    for value in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == value)
        if len(idx) < folds:
            raise CalibrationError(
                f"insufficient samples for calibration: label {value} has "
                f"{len(idx)} samples, need at least {folds}"
            )
        perm = idx[rng.permutation(len(idx))]
        for j, sample in enumerate(perm):
            fold_of[sample] = j % folds
    return fold_of


def crossval_scores(
    X: Sequence[SparseVector],
    y: Sequence[int],
    cfg: TrainConfig,
    folds: int = 5,
    n_features: int | None = None,
) -> list[tuple[float, int]]:
    """Out-of-sample decision values for every sample of one class pair.

    Sample i is scored by the model trained on all folds except its own,
    so no score is produced by a model that saw the sample. Output is
    aligned with the input order.
    """
    y_arr = np.asarray(y, dtype=np.int64)
    if n_features is None:
        dims = [int(v.indices[-1]) + 1 for v in X if len(v)]
        n_features = max(dims) if dims else 0
    fold_of = stratified_folds(y_arr, folds, cfg.seed)
    X_csr = _vectors_to_csr(X, n_features)
    scores = np.empty(len(X), dtype=np.float64)
    for fold in range(folds):
        train_mask = fold_of != fold
        held = np.flatnonzero(~train_mask)
        solution = solve_dual(X_csr[train_mask], y_arr[train_mask], cfg)
        scores[held] = X_csr[held] @ solution.weights + solution.bias
    return [(float(s), int(t)) for s, t in zip(scores, y_arr)]


def sigmoid_objective(a: float, b: float, scores: np.ndarray, targets: np.ndarray) -> float:
    """Negative log-likelihood of the sigmoid under smoothed targets.

    Uses the overflow-safe split form: for z >= 0 the term is
    t*z + log(1+exp(-z)), otherwise (t-1)*z + log(1+exp(z)).
    """
    z = a * scores + b
    pos = z >= 0
    out = np.empty_like(z)
    out[pos] = targets[pos] * z[pos] + np.log1p(np.exp(-z[pos]))
    out[~pos] = (targets[~pos] - 1.0) * z[~pos] + np.log1p(np.exp(z[~pos]))
    return float(out.sum())


def smoothed_targets(labels: np.ndarray) -> np.ndarray:
    n_pos = int((labels > 0).sum())
    n_neg = int((labels <= 0).sum())
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    return np.where(labels > 0, hi, lo)


def fit_sigmoid(scored: Iterable[tuple[float, int]]) -> SigmoidParams:
    """Fit (A, B) by Newton's method with backtracking line search.

    Converges when the gradient infinity-norm drops below 1e-10 or after
    100 iterations; the Hessian carries a tiny ridge so the Newton system
    stays solvable even for degenerate score sets.
    """
    pairs = list(scored)
    if not pairs:
        raise CalibrationError("no scores to calibrate on")
    scores = np.array([s for s, _ in pairs], dtype=np.float64)
    labels = np.array([t for _, t in pairs], dtype=np.int64)
    if not np.isfinite(scores).all():
        raise CalibrationError("non-finite decision values")
    if not ((labels > 0).any() and (labels <= 0).any()):
        raise CalibrationError("both labels required to fit a sigmoid")

    targets = smoothed_targets(labels)
    n_pos = int((labels > 0).sum())
    n_neg = len(labels) - n_pos
    ridge = 1e-12
    min_step = 1e-10

    a = 0.0
    b = math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = sigmoid_objective(a, b, scores, targets)
    for _ in range(SIGMOID_MAX_ITER):
        z = a * scores + b
        # p = P(positive | f) = 1/(1+exp(z)), q = 1-p, both overflow-safe
        pos = z >= 0
        p = np.empty_like(z)
        q = np.empty_like(z)
        ez = np.exp(-np.abs(z))
        p[pos] = ez[pos] / (1.0 + ez[pos])
        q[pos] = 1.0 / (1.0 + ez[pos])
        p[~pos] = 1.0 / (1.0 + ez[~pos])
        q[~pos] = ez[~pos] / (1.0 + ez[~pos])
        d1 = targets - p
        g1 = float(np.dot(scores, d1))
        g2 = float(d1.sum())
        if max(abs(g1), abs(g2)) < SIGMOID_GRAD_TOL:
            break
        d2 = p * q
        h11 = float(np.dot(scores * scores, d2)) + ridge
        h22 = float(d2.sum()) + ridge
        h21 = float(np.dot(scores, d2))
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        descent = g1 * da + g2 * db

        step = 1.0
        while step >= min_step:
            na, nb = a + step * da, b + step * db
            nf = sigmoid_objective(na, nb, scores, targets)
            if nf < fval + 1e-4 * step * descent:
                a, b, fval = na, nb, nf
                break
            step /= 2.0
        else:
            log.debug("sigmoid line search stalled; keeping current point")
            break
    return SigmoidParams(a, b)


def _coupling_matrix(r: np.ndarray) -> np.ndarray:
    k = r.shape[0]
    Q = np.zeros((k, k), dtype=np.float64)
    for t in range(k):
        Q[t, t] = sum(r[j, t] * r[j, t] for j in range(k) if j != t)
        for j in range(k):
            if j != t:
                Q[t, j] = -r[j, t] * r[t, j]
    return Q


def coupling_objective(r: np.ndarray, p: np.ndarray) -> float:
    k = len(p)
    total = 0.0
    for i in range(k):
        for j in range(k):
            if i != j:
                total += (r[j, i] * p[i] - r[i, j] * p[j]) ** 2
    return total


def validate_pairwise(r: np.ndarray) -> None:
    k = r.shape[0]
    if r.shape != (k, k):
        raise CalibrationError("pairwise matrix must be square")
    off = ~np.eye(k, dtype=bool)
    if not ((r[off] > 0) & (r[off] < 1)).all():
        raise CalibrationError("pairwise probabilities must lie strictly in (0, 1)")
    asym = np.abs(r + r.T - 1.0)[off]
    if asym.size and float(asym.max()) > 1e-9:
        raise CalibrationError(
            f"inconsistent pairwise probabilities: |r_ij + r_ji - 1| up to {float(asym.max()):.3e}"
        )


def couple(r: np.ndarray, return_objectives: bool = False):
    """Couple pairwise probabilities r[i, j] into a single distribution.

    Fixed-point iteration over the normalized vector: each component is
    set to its stationarity value and the whole vector is renormalized
    immediately, because the stationarity condition assumes the iterate
    sums to one (deferring normalization lets components with tiny
    diagonal terms explode and the sweep lands on a spurious point).
    A final renormalization per sweep scrubs accumulated rounding drift.
    Stops when successive sweeps differ by less than 1e-10 in infinity
    norm, or after 10,000 sweeps. With two classes this reduces to the
    pairwise estimate itself.
    """
    validate_pairwise(r)
    k = r.shape[0]
    if k == 1:
        p = np.ones(1)
        return (p, [0.0]) if return_objectives else p
    Q = _coupling_matrix(r)
    p = np.full(k, 1.0 / k, dtype=np.float64)
    objectives = [coupling_objective(r, p)] if return_objectives else None
    Qp = Q @ p
    pQp = float(p @ Qp)
    for _ in range(COUPLE_MAX_ITER):
        prev = p.copy()
        for t in range(k):
            diff = (pQp - Qp[t]) / Q[t, t]
            p[t] += diff
            scale = 1.0 + diff
            pQp = (pQp + diff * (diff * Q[t, t] + 2.0 * Qp[t])) / (scale * scale)
            Qp = (Qp + diff * Q[:, t]) / scale
            p /= scale
        p /= p.sum()
        Qp = Q @ p
        pQp = float(p @ Qp)
        if objectives is not None:
            objectives.append(coupling_objective(r, p))
        if float(np.max(np.abs(p - prev))) < COUPLE_TOL:
            break
    if return_objectives:
        return p, objectives
    return p


def pairwise_matrix(
    classes: Sequence[str],
    pairs: Iterable[CalibratedPair],
    x: SparseVector,
) -> np.ndarray:
    """Apply each pair's sigmoid to its decision value for x."""
    index = {code: i for i, code in enumerate(classes)}
    k = len(classes)
    r = np.full((k, k), 0.5, dtype=np.float64)
    for pair in pairs:
        f = pair.classifier.decision_value(x)
        p_pos = pair.sigmoid.probability(f)
        # keep strictly inside (0,1): coupling needs open-interval inputs
        p_pos = min(max(p_pos, 1e-12), 1.0 - 1e-12)
        i, j = index[pair.positive_class], index[pair.negative_class]
        r[i, j] = p_pos
        r[j, i] = 1.0 - p_pos
    return r


def predict_distribution(model: "MulticlassModel", x: SparseVector) -> ClassDistribution:
    """Full class distribution for one vectorized document.

    An empty vector is legal: every decision value degenerates to the
    pair's bias and the coupled distribution is still well defined.
    """
    r = pairwise_matrix(model.classes, model.pairs, x)
    p = couple(r)
    p = np.maximum(p, 0.0)
    p = p / p.sum()
    return ClassDistribution({code: float(v) for code, v in zip(model.classes, p)})


def calibrate_pairs(
    X: Sequence[SparseVector],
    labels: Sequence[str],
    classifiers: Sequence[BinaryLinearClassifier],
    cfg: TrainConfig,
    folds: int = 5,
    n_features: int | None = None,
) -> list[CalibratedPair]:
    """Fit a sigmoid for every trained pair from cross-validated scores.

    The classifier used at serving time is the one trained on all of the
    pair's data; cross-validation exists only to produce unbiased scores
    for the sigmoid fit.
    """
    by_class: dict[str, list[int]] = {}
    for i, code in enumerate(labels):
        by_class.setdefault(code, []).append(i)
    calibrated = []
    for clf in classifiers:
        rows = by_class[clf.positive_class] + by_class[clf.negative_class]
        pair_X = [X[i] for i in rows]
        pair_y = [1] * len(by_class[clf.positive_class]) + [-1] * len(
            by_class[clf.negative_class]
        )
        scored = crossval_scores(pair_X, pair_y, cfg, folds=folds, n_features=n_features)
        calibrated.append(CalibratedPair(clf, fit_sigmoid(scored)))
    return calibrated

"""Agenda weights learned by gradient descent over precomputed degrees."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .agendas import FuzzyAgenda
from .context import FormalContext
from .errors import DegenerateLabels, LengthMismatch, NoOutliersInTrain, NonPositiveBal
from .scaling import DataTable
from .unsup import DegreeMatrix, UnsupModel, degree_matrix, fit_unsup, rng_for

log = logging.getLogger(__name__)

WEIGHT_STREAM = 2
ORIENTATIONS = ("literal", "swapped")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 0.05
    seed: int = 0
    init_scale: float = 1.0
    denominator_epsilon: float = 1e-8
    loss_orientation: str = "literal"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate >= 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not self.init_scale > 0 or not self.denominator_epsilon > 0:
            raise ValueError("init_scale and denominator_epsilon must be positive")
        if self.loss_orientation not in ORIENTATIONS:
            raise ValueError(f"loss_orientation must be one of {ORIENTATIONS}")


def guarded_sum(weights, eps: float) -> float:
    """``sum(weights)``, pushed away from zero to magnitude ``eps`` keeping its sign."""
    s = float(np.sum(weights))
    if abs(s) < eps:
        return eps if s >= 0 else -eps
    return s


def weighted_score(rows, weights, eps: float = 1e-8):
    """Weighted mean ``sum(w * d) / sum(w)`` per row; not clipped to [0, 1].

    Weights are first divided by their largest-magnitude entry, which leaves
    the ratio unchanged and makes a constant weight vector exactly the plain
    mean.
    """
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if rows.shape[-1] != w.shape[0]:
        raise LengthMismatch(f"{rows.shape[-1]} degrees for {w.shape[0]} weights")
    total = float(np.sum(w))
    if abs(total) < eps:
        out = np.sum(rows * w, axis=-1) / guarded_sum(w, eps)
    else:
        ref = w[np.argmax(np.abs(w))]
        q = w / ref
        out = np.sum(rows * q, axis=-1) / np.sum(q)
    return float(out) if np.ndim(out) == 0 else out


def _residual_weights(scores, labels, bal, orientation):
    """d loss / d score for each object."""
    outlier = labels == 1
    if orientation == "literal":
        return np.where(outlier, 2.0 * scores, -2.0 * (1.0 - scores) / bal)
    return np.where(outlier, -2.0 * (1.0 - scores), 2.0 * scores / bal)


def _check(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise LengthMismatch(f"{scores.size} scores for {labels.size} labels")
    return scores, labels


def loss(scores, labels, bal: float, orientation: str = "literal") -> float:
    """Class-balanced squared loss.

    ``literal``: outliers contribute ``s**2``, inliers ``(1 - s)**2 / bal``.
    ``swapped``: outliers contribute ``(1 - s)**2``, inliers ``s**2 / bal``.
    """
    scores, labels = _check(scores, labels)
    if not bal > 0:
        raise NonPositiveBal(f"bal must be > 0, got {bal}")
    outlier = labels == 1
    if orientation == "literal":
        terms = np.where(outlier, scores**2, (1.0 - scores) ** 2 / bal)
    elif orientation == "swapped":
        terms = np.where(outlier, (1.0 - scores) ** 2, scores**2 / bal)
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    return float(np.sum(terms))


def compute_bal(train_labels) -> float:
    labels = np.asarray(train_labels, dtype=np.int64)
    n_out = int(np.sum(labels == 1))
    if n_out == 0:
        raise NoOutliersInTrain("training labels contain no outliers")
    return len(labels) / n_out


def loss_gradient(D, weights, labels, bal: float, eps: float = 1e-8, orientation: str = "literal") -> np.ndarray:
    """Analytic gradient of :func:`loss` composed with :func:`weighted_score`."""
    D = np.asarray(getattr(D, "values", D), dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if D.shape != (len(labels), len(w)):
        raise LengthMismatch(f"degree matrix {D.shape} vs {len(labels)} labels x {len(w)} weights")
    S = guarded_sum(w, eps)
    scores = (D @ w) / S
    r = _residual_weights(scores, labels, bal, orientation)
    return (r @ (D - scores[:, None])) / S


def _check_labels(labels):
    labels = np.asarray(labels, dtype=np.int64)
    if not np.any(labels == 1):
        raise NoOutliersInTrain("training labels contain no outliers")
    if np.all(labels == 1):
        raise DegenerateLabels("training labels contain no inliers")
    return labels


def train(D, labels, config: TrainConfig = TrainConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Full-batch gradient descent from a seeded uniform initialisation.

    Returns ``(weights, loss_trace)`` where ``loss_trace[e]`` is the loss of
    the predictions made at epoch ``e``, before that epoch's update.
    """
    D = np.asarray(getattr(D, "values", D), dtype=np.float64)
    labels = _check_labels(labels)
    if D.shape[0] != len(labels):
        raise LengthMismatch(f"{D.shape[0]} degree rows for {len(labels)} labels")
    bal = compute_bal(labels)
    eps = config.denominator_epsilon
    w = rng_for(config.seed, WEIGHT_STREAM).uniform(-config.init_scale, config.init_scale, D.shape[1])
    trace = np.empty(config.epochs)
    for e in range(config.epochs):
        scores = (D @ w) / guarded_sum(w, eps)
        trace[e] = loss(scores, labels, bal, config.loss_orientation)
        w = w - config.learning_rate * loss_gradient(D, w, labels, bal, eps, config.loss_orientation)
    log.info("train: epochs=%d loss %.6g -> %.6g", config.epochs, trace[0], trace[-1])
    return w, trace


@dataclass(frozen=True, eq=False)
class SupModel:
    """Unsupervised model over training inliers plus learned agenda weights."""

    unsup: UnsupModel
    weights: FuzzyAgenda
    config: TrainConfig
    loss_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if len(self.weights) != len(self.unsup.space):
            raise LengthMismatch(f"{len(self.weights)} weights for {len(self.unsup.space)} agendas")

    # shared surface with UnsupModel, used by explanations and the CLI
    @property
    def context(self) -> FormalContext:
        return self.unsup.context

    @property
    def space(self):
        return self.unsup.space

    @property
    def scaler(self):
        return self.unsup.scaler

    @property
    def gamma(self) -> float:
        return self.unsup.gamma

    @property
    def population(self):
        return self.unsup.population

    @property
    def population_indices(self):
        return self.unsup.population_indices

    @property
    def labels(self):
        return self.unsup.labels

    @property
    def meta(self) -> dict:
        return self.unsup.meta

    @property
    def masks(self):
        return self.unsup.masks

    def binarize(self, table: DataTable) -> FormalContext:
        return self.unsup.binarize(table)

    def weight_vector(self) -> np.ndarray:
        return np.asarray(self.weights.weights)

    def denominator(self) -> float:
        return guarded_sum(self.weights.weights, self.config.denominator_epsilon)

    def score_rows(self, D: DegreeMatrix) -> np.ndarray:
        return np.atleast_1d(weighted_score(D.values, self.weights.weights, self.config.denominator_epsilon))

    def score(self, table: DataTable, threads=None) -> np.ndarray:
        return predict_sup(self, self.binarize(table), threads=threads)

    def config_dict(self) -> dict:
        return asdict(self.config)


def predict_sup(model: SupModel, queries: FormalContext, threads=None) -> np.ndarray:
    """Weighted scores of ``queries``; closures count training inliers only."""
    D = degree_matrix(model.unsup, queries, threads=threads)
    return model.score_rows(D)


def fit_sup(
    table: DataTable,
    bins: int,
    alpha: int = 2,
    include_full: bool = True,
    gamma: Optional[float] = None,
    config: TrainConfig = TrainConfig(),
    space=None,
    scaler=None,
    meta: Optional[dict] = None,
    threads=None,
) -> SupModel:
    """Fit the unsupervised base over inliers, then learn agenda weights.

    Known outliers are left out of every closure, during training and at
    prediction; a training inlier counts itself.
    """
    if table.labels is None:
        raise DegenerateLabels("supervised fitting needs labels")
    labels = _check_labels(table.labels)
    base = fit_unsup(
        table, bins, alpha, include_full, gamma, config.seed,
        space=space, scaler=scaler, population=labels == 0, meta=meta,
    )
    D = degree_matrix(base, threads=threads)
    w, trace = train(D.values, labels, config)
    return SupModel(base, FuzzyAgenda(w), config, trace)

"""Closure-size outlier degrees and the mean-aggregated unsupervised score."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agendas import AgendaSpace, small_agendas
from .context import FormalContext, closure_size_matrix, full_mask, mask_indices, pack_bits
from .errors import EmptyAgendaSpace, InvalidGamma, LengthMismatch
from .scaling import DataTable, Scaler, binarize, fit_scaler

log = logging.getLogger(__name__)

# independent RNG streams derived from one user seed
GAMMA_STREAM = 1


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def degree(closure_size, gamma: float):
    """``exp(-(gamma * size)**2)``: 1 for an empty closure, decaying to 0."""
    if not gamma > 0:
        raise InvalidGamma(f"gamma must be > 0, got {gamma}")
    size = np.asarray(closure_size, dtype=np.float64)
    out = np.exp(-np.square(gamma * size))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DegreeMatrix:
    """``values[q, t]``: outlier degree of query ``q`` under agenda ``t``."""

    values: np.ndarray
    row_ids: tuple
    agenda_names: tuple
    closure_sizes: Optional[np.ndarray] = None

    @property
    def shape(self):
        return self.values.shape


def score_unsup(row) -> float | np.ndarray:
    """Mean degree over agendas (row-wise for a matrix)."""
    row = np.ascontiguousarray(row, dtype=np.float64)
    if row.shape[-1] == 0:
        raise EmptyAgendaSpace("cannot average over an empty agenda space")
    out = np.sum(row, axis=-1) / row.shape[-1]
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class UnsupModel:
    """Training context plus everything needed to score new records.

    ``population`` marks the training objects counted in closures; it is all
    of them for the unsupervised detector and the inliers for the supervised
    one. ``meta`` carries run provenance (seed, split) for the CLI.
    """

    context: FormalContext
    scaler: Scaler
    space: AgendaSpace
    gamma: float
    population: np.ndarray
    labels: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidGamma(f"gamma must be > 0, got {self.gamma}")
        if self.context.num_features != self.scaler.num_features:
            raise LengthMismatch("context and scaler disagree on feature count")
        if self.space.num_attributes != self.scaler.num_attributes:
            raise LengthMismatch("agenda space and scaler disagree on attribute count")
        if len(self.space) == 0:
            raise EmptyAgendaSpace("model needs at least one agenda")
        pop = np.asarray(self.population, dtype=np.uint64)
        if pop.shape != full_mask(self.context.num_objects).shape:
            raise LengthMismatch("population mask does not match the context")
        object.__setattr__(self, "population", pop)
        object.__setattr__(self, "_masks", self.space.masks(self.scaler.bins))

    @property
    def masks(self) -> list:
        return self._masks

    @property
    def population_indices(self) -> np.ndarray:
        return mask_indices(self.population, self.context.num_objects)

    def binarize(self, table: DataTable) -> FormalContext:
        return binarize(self.scaler, table)

    def weight_vector(self) -> np.ndarray:
        return np.full(len(self.space), 1.0 / len(self.space))

    def score_rows(self, D: DegreeMatrix) -> np.ndarray:
        return np.atleast_1d(score_unsup(D.values))

    def denominator(self) -> float:
        return 1.0

    def score(self, table: DataTable, threads=None) -> np.ndarray:
        return self.score_rows(degree_matrix(self, self.binarize(table), threads=threads))


def degree_matrix(
    model: UnsupModel,
    queries: Optional[FormalContext] = None,
    population: Optional[np.ndarray] = None,
    threads: Optional[int] = None,
) -> DegreeMatrix:
    """Per-agenda degrees of each query, closures counted over ``population``.

    Defaults: the model's training context as queries and the model's own
    population mask.
    """
    queries = model.context if queries is None else queries
    population = model.population if population is None else population
    sizes = closure_size_matrix(model.context, model.masks, population, queries, threads=threads)
    return DegreeMatrix(
        degree(sizes, model.gamma).reshape(sizes.shape),
        queries.object_ids,
        tuple(model.space.names),
        sizes,
    )


def draw_gamma(seed: int) -> float:
    """Uniform on (0, 1]; zero is excluded."""
    return float(1.0 - rng_for(seed, GAMMA_STREAM).random())


def fit_unsup(
    table: DataTable,
    bins: int,
    alpha: int = 2,
    include_full: bool = True,
    gamma: Optional[float] = None,
    seed: int = 0,
    space: Optional[AgendaSpace] = None,
    scaler: Optional[Scaler] = None,
    population: Optional[np.ndarray] = None,
    meta: Optional[dict] = None,
) -> UnsupModel:
    """Fit scaler and context on ``table``.

    ``scaler`` overrides the scaler fitted on ``table`` (e.g. one fitted on the
    whole dataset); ``space`` overrides the small-agenda space; ``population``
    is a boolean row selector restricting which training rows count in
    closures.
    """
    scaler = fit_scaler(table, bins) if scaler is None else scaler
    ctx = binarize(scaler, table)
    if space is None:
        space = small_agendas(table.num_attributes, alpha, include_full, table.column_names)
    if gamma is None:
        gamma = draw_gamma(seed)
    elif not gamma > 0:
        raise InvalidGamma(f"gamma must be > 0, got {gamma}")
    pop = full_mask(ctx.num_objects) if population is None else pack_bits(population)
    model = UnsupModel(ctx, scaler, space, float(gamma), pop, table.labels, dict(meta or {}))
    log.info(
        "fit: bins=%d gamma=%.6g alpha=%d |T|=%d objects=%d",
        scaler.bins, model.gamma, alpha, len(space), ctx.num_objects,
    )
    return model

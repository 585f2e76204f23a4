"""Local and global explanations, and the data behind histogram/heat-map plots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .context import FormalContext, closure_sizes_all, pack_bits, select_objects
from .errors import IndexOutOfRange, InvalidAttributePair, UnknownAgenda, UnknownObject
from .unsup import degree_matrix

DEGREE_FLOOR = 5e-5


@dataclass(frozen=True)
class Contribution:
    agenda: str
    degree: float
    weight: float
    contribution: float
    raw_contribution: float
    closure_size: int


@dataclass(frozen=True)
class LocalExplanation:
    """Ranked agenda contributions to one object's score.

    ``entries`` holds every agenda, sorted by contribution (ties by agenda
    order); ``shown`` is the reported part: degree above the floor, at most
    ``top_k`` of them.
    """

    object_id: object
    score: float
    entries: tuple
    top_k: int
    degree_floor: float

    @property
    def shown(self) -> list[Contribution]:
        return [e for e in self.entries if e.degree > self.degree_floor][: self.top_k]

    @property
    def omitted_count(self) -> int:
        return len(self.entries) - len(self.shown)

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "score": self.score,
            "entries": [
                {
                    "agenda": e.agenda,
                    "degree": e.degree,
                    "weight": e.weight,
                    "contribution": e.contribution,
                    "raw_contribution": e.raw_contribution,
                    "closure_size": e.closure_size,
                }
                for e in self.shown
            ],
            "omitted_count": self.omitted_count,
        }

    def render(self) -> str:
        shown = self.shown
        if not shown:
            return (
                f"Object {self.object_id} has outlier degree {self.score:.4g}; "
                "no agenda gives it a non-negligible degree."
            )
        lines = [
            f"Object {self.object_id} has outlier degree {self.score:.4g}, driven by "
            + ", ".join(f"{e.agenda} (degree {e.degree:.4g}, weight {e.weight:.4g})" for e in shown)
            + "."
        ]
        for e in shown:
            lines.append(
                f"  {e.agenda}: {e.closure_size} training object(s) fall in the same bins"
            )
        return "\n".join(lines)


def _query_row(model, object_id, queries: Optional[FormalContext]):
    ctx = model.context if queries is None else queries
    try:
        idx = ctx.object_ids.index(object_id)
    except ValueError:
        # ids read from a CSV may be strings while the caller passes ints, or vice versa
        matches = [i for i, oid in enumerate(ctx.object_ids) if str(oid) == str(object_id)]
        if not matches:
            raise UnknownObject(f"no object with id {object_id!r}") from None
        idx = matches[0]
    return select_objects(ctx, [idx])


def explain_local(
    model,
    object_id,
    queries: Optional[FormalContext] = None,
    top_k: int = 10,
    degree_floor: float = DEGREE_FLOOR,
) -> LocalExplanation:
    """Explain one object's score (a training object unless ``queries`` is given)."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    row_ctx = _query_row(model, object_id, queries)
    D = degree_matrix(_base(model), row_ctx)
    degrees = D.values[0]
    w = model.weight_vector()
    S = model.denominator()
    raw = w * degrees
    contrib = raw / S
    score = float(model.score_rows(D)[0])
    order = sorted(range(len(w)), key=lambda t: (-contrib[t], t))
    entries = tuple(
        Contribution(
            D.agenda_names[t], float(degrees[t]), float(w[t]), float(contrib[t]),
            float(raw[t]), int(D.closure_sizes[0, t]),
        )
        for t in order
    )
    return LocalExplanation(row_ctx.object_ids[0], score, entries, top_k, degree_floor)


def _base(model):
    return getattr(model, "unsup", model)


@dataclass(frozen=True)
class GlobalEntry:
    agenda: str
    weight: float
    high_fraction: float


@dataclass(frozen=True)
class GlobalExplanation:
    entries: tuple
    degree_threshold: float

    def to_dict(self) -> dict:
        return {
            "degree_threshold": self.degree_threshold,
            "agendas": [
                {"agenda": e.agenda, "weight": e.weight, "high_fraction": e.high_fraction}
                for e in self.entries
            ],
        }


def explain_global(model, degree_threshold: float = 0.5) -> GlobalExplanation:
    """Agendas by |weight|, with the share of training objects they rate highly.

    Ties in |weight| (always the case for the unsupervised model) fall back to
    the high-degree share, then to agenda order.
    """
    D = degree_matrix(_base(model))
    fractions = (D.values >= degree_threshold).mean(axis=0) if D.values.shape[0] else np.zeros(D.shape[1])
    w = model.weight_vector()
    order = sorted(range(len(w)), key=lambda t: (-abs(w[t]), -fractions[t], t))
    return GlobalExplanation(
        tuple(GlobalEntry(D.agenda_names[t], float(w[t]), float(fractions[t])) for t in order),
        degree_threshold,
    )


def _population_sizes(model, mask) -> np.ndarray:
    base = _base(model)
    pop_idx = base.population_indices
    sizes = closure_sizes_all(base.context, mask, base.population)
    return sizes[pop_idx], pop_idx


def export_histogram(model, agenda: str) -> list[tuple[int, int]]:
    """``(closure size, number of population objects with that size)``, by size."""
    base = _base(model)
    t = base.space.index(agenda)
    sizes, _ = _population_sizes(model, base.masks[t])
    values, counts = np.unique(sizes, return_counts=True)
    return [(int(v), int(c)) for v, c in zip(values, counts)]


@dataclass(frozen=True)
class Heatmap:
    """``cells[p][q]``: log2 closure size of objects binned at (p, q); None if empty."""

    row_attribute: str
    col_attribute: str
    row_edges: list
    col_edges: list
    cells: list

    def to_dict(self) -> dict:
        return {
            "agenda": f"{self.row_attribute}-{self.col_attribute}",
            "row_attribute": self.row_attribute,
            "col_attribute": self.col_attribute,
            "row_edges": self.row_edges,
            "col_edges": self.col_edges,
            "cells": self.cells,
        }

    def to_csv_rows(self) -> list[tuple]:
        return [
            (p, q, v)
            for p, row in enumerate(self.cells)
            for q, v in enumerate(row)
            if v is not None
        ]


def _edges(scaler, j) -> list[float]:
    lo, hi = float(scaler.alpha[j]), float(scaler.beta[j])
    return [lo + i * (hi - lo) / scaler.bins for i in range(scaler.bins + 1)]


def export_heatmap(model, attribute_i: int, attribute_j: int) -> Heatmap:
    base = _base(model)
    scaler = base.scaler
    m = scaler.num_attributes
    if attribute_i == attribute_j or not (0 <= attribute_i < m and 0 <= attribute_j < m):
        raise InvalidAttributePair(f"need two distinct attributes in [0, {m}), got {attribute_i}, {attribute_j}")
    n = scaler.bins
    bits = np.zeros(scaler.num_features, dtype=bool)
    for a in (attribute_i, attribute_j):
        bits[a * n : (a + 1) * n] = True
    sizes, pop_idx = _population_sizes(model, pack_bits(bits))
    codes = base.context.codes[pop_idx]
    cells: list[list] = [[None] * n for _ in range(n)]
    seen: dict[tuple[int, int], int] = {}
    for (p, q), size in zip(codes[:, [attribute_i, attribute_j]].tolist(), sizes.tolist()):
        prev = seen.setdefault((p, q), size)
        if prev != size:
            raise AssertionError(f"cell ({p}, {q}) holds closure sizes {prev} and {size}")
    for (p, q), size in seen.items():
        cells[p][q] = math.log2(size)
    names = scaler.column_names
    return Heatmap(
        str(names[attribute_i]), str(names[attribute_j]),
        _edges(scaler, attribute_i), _edges(scaler, attribute_j), cells,
    )


def attribute_index(model, name) -> int:
    names = [str(c) for c in _base(model).scaler.column_names]
    if str(name) in names:
        return names.index(str(name))
    raise IndexOutOfRange(f"no attribute named {name!r}; have {names}")


__all__ = [
    "Contribution", "LocalExplanation", "GlobalEntry", "GlobalExplanation", "Heatmap",
    "explain_local", "explain_global", "export_histogram", "export_heatmap", "UnknownAgenda",
]

"""Crisp agendas, designated agenda spaces and fuzzy agendas."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .context import pack_bits
from .errors import (
    AlphaTooLarge,
    DuplicateAgenda,
    EmptyAgenda,
    IndexOutOfRange,
    NegativeWeight,
    NonFinite,
    UnknownAgenda,
    ZeroMass,
)

log = logging.getLogger(__name__)

FULL = "full"


@dataclass(frozen=True)
class Agenda:
    """A crisp agenda: a set of attributes (before binarization)."""

    attributes: tuple
    kind: str
    name: str


def _kind(attrs: tuple, num_attributes: int) -> str:
    if len(attrs) == num_attributes:
        return FULL
    return {1: "singleton", 2: "pair"}.get(len(attrs), "k-set")


def make_agenda(attrs, num_attributes: int, column_names: Optional[Sequence[str]] = None, kind=None) -> Agenda:
    attrs = tuple(sorted(set(int(a) for a in attrs)))
    if not attrs:
        raise EmptyAgenda("agenda has no attributes")
    bad = [a for a in attrs if not 0 <= a < num_attributes]
    if bad:
        raise IndexOutOfRange(f"attributes {bad} not in [0, {num_attributes})")
    kind = kind or _kind(attrs, num_attributes)
    if kind == FULL:
        name = FULL
    else:
        names = column_names or [f"x{a}" for a in range(num_attributes)]
        name = "-".join(str(names[a]) for a in attrs)
    return Agenda(attrs, kind, name)


@dataclass(frozen=True)
class AgendaSpace:
    """Ordered designated agenda set with no repeated attribute sets."""

    agendas: tuple
    num_attributes: int
    notes: tuple = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.agendas)

    def __iter__(self):
        return iter(self.agendas)

    def __getitem__(self, i) -> Agenda:
        return self.agendas[i]

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.agendas]

    def index(self, name: str) -> int:
        for t, a in enumerate(self.agendas):
            if a.name == name:
                return t
        raise UnknownAgenda(f"no agenda named {name!r}; have {self.names}")

    def masks(self, bins: int) -> list[np.ndarray]:
        """Feature masks: every bin of every attribute in the agenda."""
        out = []
        for agenda in self.agendas:
            bits = np.zeros(self.num_attributes * bins, dtype=bool)
            for a in agenda.attributes:
                bits[a * bins : (a + 1) * bins] = True
            out.append(pack_bits(bits))
        return out


def _space(agendas: list[Agenda], num_attributes: int, dedup: bool, notes=()) -> AgendaSpace:
    seen = set()
    kept = []
    for agenda in agendas:
        if agenda.attributes in seen:
            if dedup:
                continue
            raise DuplicateAgenda(f"agenda {agenda.name!r} listed twice")
        seen.add(agenda.attributes)
        kept.append(agenda)
    return AgendaSpace(tuple(kept), num_attributes, tuple(notes))


def small_agendas(
    num_attributes: int,
    alpha: int,
    include_full: bool = True,
    column_names: Optional[Sequence[str]] = None,
) -> AgendaSpace:
    """All attribute subsets of size at most ``alpha``, optionally plus the full set.

    Subsets come in order of size, then lexicographically. The full agenda is
    appended last unless it coincides with a subset already present.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if alpha > num_attributes:
        raise AlphaTooLarge(f"alpha={alpha} exceeds {num_attributes} attributes")
    agendas = [
        make_agenda(c, num_attributes, column_names, kind={1: "singleton", 2: "pair"}.get(k, "k-set"))
        for k in range(1, alpha + 1)
        for c in combinations(range(num_attributes), k)
    ]
    if include_full:
        agendas.append(make_agenda(range(num_attributes), num_attributes, column_names, kind=FULL))
    return _space(agendas, num_attributes, dedup=True)


def expert_agendas(
    attribute_sets: Sequence,
    num_attributes: int,
    column_names: Optional[Sequence[str]] = None,
) -> AgendaSpace:
    """Agendas given explicitly, in the given order; repeats are an error."""
    agendas = []
    for attrs in attribute_sets:
        agenda = make_agenda(attrs, num_attributes, column_names)
        agendas.append(Agenda(agenda.attributes, "expert" if agenda.kind != FULL else FULL, agenda.name))
    return _space(agendas, num_attributes, dedup=False)


def read_agenda_file(path, column_names: Sequence[str]) -> AgendaSpace:
    """One agenda per line as comma-separated attribute names; ``full`` allowed."""
    column_names = list(column_names)
    sets = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        names = [n.strip() for n in line.split(",") if n.strip()]
        if names == [FULL]:
            sets.append(range(len(column_names)))
            continue
        unknown = [n for n in names if n not in column_names]
        if unknown:
            raise IndexOutOfRange(f"{path}: line {lineno}: unknown attributes {unknown}")
        sets.append([column_names.index(n) for n in names])
    return expert_agendas(sets, len(column_names), column_names)


@dataclass(frozen=True, eq=False)
class FuzzyAgenda:
    """Real-valued weights aligned with an agenda space; entries may be negative."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        if not np.all(np.isfinite(w)):
            raise NonFinite("fuzzy agenda weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    def mass(self) -> np.ndarray:
        return normalize(self.weights)


def normalize(weights) -> np.ndarray:
    """Mass function induced by non-negative weights."""
    w = np.asarray(getattr(weights, "weights", weights), dtype=np.float64)
    if np.any(w < 0):
        raise NegativeWeight("negative weights do not define a mass function")
    total = w.sum()
    if not total > 0:
        raise ZeroMass("weights sum to zero")
    return w / total


def adaptive_search(
    score_fn: Callable[[AgendaSpace], "FuzzyAgenda | np.ndarray"],
    num_attributes: int,
    alpha_schedule: Sequence[int],
    drop_threshold: Optional[float] = None,
    column_names: Optional[Sequence[str]] = None,
) -> AgendaSpace:
    """Grow the agenda space from attribute combinations that earn weight.

    Round ``r`` scores a space of subsets with fewer than ``alpha_schedule[r]``
    attributes (drawn from the attributes of the previous round's survivors),
    then drops agendas whose share of total absolute weight is below
    ``drop_threshold`` (default: a quarter of the uniform share). Stops when no
    newly added agenda survives, when the full attribute set is reached, or
    when the schedule runs out.
    """
    schedule = [int(a) for a in alpha_schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError(f"alpha_schedule must be strictly increasing, got {schedule}")
    if schedule[0] < 2:
        raise ValueError("first alpha must be >= 2 so that singletons are included")
    if drop_threshold is not None and not 0 < drop_threshold < 1:
        raise ValueError(f"drop_threshold must be in (0, 1), got {drop_threshold}")

    def subsets(pool, below):
        return [
            make_agenda(c, num_attributes, column_names)
            for k in range(1, below)
            for c in combinations(sorted(pool), k)
        ]

    pool = set(range(num_attributes))
    survivors: list[Agenda] = []
    space = _space(subsets(pool, schedule[0]), num_attributes, dedup=True)
    for r, alpha in enumerate(schedule):
        if r > 0:
            pool = set().union(*(a.attributes for a in survivors))
            known = {a.attributes for a in survivors}
            fresh = [a for a in subsets(pool, alpha) if a.attributes not in known]
            if not fresh:
                break
            space = _space(survivors + fresh, num_attributes, dedup=True)
        new = {a.attributes for a in space} - {a.attributes for a in survivors}

        weights = _weights(score_fn(space))
        if len(weights) != len(space):
            raise ValueError(f"score_fn returned {len(weights)} weights for {len(space)} agendas")
        share = np.abs(weights)
        total = share.sum()
        share = share / total if total > 0 else share
        threshold = drop_threshold if drop_threshold is not None else 1.0 / (4 * len(space))
        survivors = [a for a, s in zip(space, share) if s >= threshold]
        log.info("adaptive round %d: %d agendas scored, %d kept", r, len(space), len(survivors))

        if not survivors:
            msg = f"adaptive search round {r}: every agenda fell below threshold {threshold:.4g}"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            return AgendaSpace((), num_attributes, (msg,))
        if not new & {a.attributes for a in survivors}:
            break
        if any(len(a.attributes) == num_attributes for a in survivors):
            break
    return _space(survivors, num_attributes, dedup=True)


def _weights(result) -> np.ndarray:
    return np.asarray(getattr(result, "weights", result), dtype=np.float64)

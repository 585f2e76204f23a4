"""Tabular ingestion and equal-width interval scaling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .context import FormalContext, context_from_incidence
from .errors import ColumnMismatch, CSVFormatError, EmptyTable, LengthMismatch, NonFinite


@dataclass(frozen=True, eq=False)
class DataTable:
    column_names: tuple
    rows: np.ndarray
    labels: Optional[np.ndarray] = None
    record_ids: Optional[tuple] = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim == 1 and rows.size == 0:
            rows = rows.reshape(0, len(self.column_names))
        if rows.ndim != 2 or rows.shape[1] != len(self.column_names):
            raise LengthMismatch(
                f"rows have shape {rows.shape}, expected (*, {len(self.column_names)})"
            )
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (len(rows),):
                raise LengthMismatch(f"{labels.size} labels for {len(rows)} rows")
            object.__setattr__(self, "labels", labels)
        ids = tuple(range(len(rows))) if self.record_ids is None else tuple(self.record_ids)
        if len(ids) != len(rows):
            raise LengthMismatch(f"{len(ids)} record ids for {len(rows)} rows")
        object.__setattr__(self, "record_ids", ids)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def num_attributes(self) -> int:
        return len(self.column_names)

    def take(self, indices) -> "DataTable":
        indices = np.asarray(indices, dtype=np.int64)
        return DataTable(
            self.column_names,
            self.rows[indices],
            None if self.labels is None else self.labels[indices],
            tuple(self.record_ids[i] for i in indices),
        )


def read_csv(
    path,
    label_column: Optional[str] = None,
    id_column: Optional[str] = None,
    columns: Optional[Sequence[str]] = None,
) -> DataTable:
    """Read a headered, comma-separated numeric table.

    ``columns`` restricts (and orders) the attribute columns; by default every
    column except the label and id columns is an attribute. Record ids are the
    id column's raw strings, or 0-based data row numbers.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CSVFormatError(f"{path}: missing header row") from None
        for name in (label_column, id_column):
            if name is not None and name not in header:
                raise ColumnMismatch(f"{path}: no column named {name!r}")
        if columns is None:
            columns = [h for h in header if h not in (label_column, id_column)]
        else:
            missing = [c for c in columns if c not in header]
            if missing:
                raise ColumnMismatch(f"{path}: missing columns {missing}")
        col_idx = [header.index(c) for c in columns]
        label_idx = None if label_column is None else header.index(label_column)
        id_idx = None if id_column is None else header.index(id_column)

        values, labels, ids = [], [], []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise CSVFormatError(
                    f"{path}: row {lineno} has {len(record)} cells, header has {len(header)}"
                )
            row = []
            for j in col_idx:
                try:
                    v = float(record[j])
                except ValueError:
                    raise CSVFormatError(
                        f"{path}: row {lineno}, column {header[j]!r}: cannot parse {record[j]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise NonFinite(f"{path}: row {lineno}, column {header[j]!r}: {record[j]!r}")
                row.append(v)
            values.append(row)
            if label_idx is not None:
                cell = record[label_idx].strip()
                try:
                    lab = int(float(cell))
                except ValueError:
                    lab = -1
                if lab not in (0, 1):
                    raise CSVFormatError(
                        f"{path}: row {lineno}, column {label_column!r}: label {cell!r} not in {{0, 1}}"
                    )
                labels.append(lab)
            ids.append(record[id_idx].strip() if id_idx is not None else len(ids))

    rows = np.array(values, dtype=np.float64).reshape(len(values), len(columns))
    return DataTable(
        tuple(columns), rows, np.array(labels, dtype=np.int64) if label_idx is not None else None, tuple(ids)
    )


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-attribute range ``[alpha_j, beta_j]`` split into ``bins`` equal intervals.

    Attribute ``j`` owns features ``j * bins ... j * bins + bins - 1``.
    """

    column_names: tuple
    alpha: np.ndarray
    beta: np.ndarray
    bins: int

    @property
    def num_attributes(self) -> int:
        return len(self.column_names)

    @property
    def num_features(self) -> int:
        return self.num_attributes * self.bins

    def base(self, attribute: int) -> int:
        return attribute * self.bins

    def blocks(self) -> tuple:
        return tuple((j * self.bins, (j + 1) * self.bins) for j in range(self.num_attributes))

    def feature_names(self) -> list[str]:
        names = []
        for j, col in enumerate(self.column_names):
            lo, hi = float(self.alpha[j]), float(self.beta[j])
            width = (hi - lo) / self.bins
            for i in range(self.bins):
                left = lo + i * width
                right = lo + (i + 1) * width
                close = "]" if i == self.bins - 1 else ")"
                names.append(f"{col}∈[{left:.6g},{right:.6g}{close}")
        return names


def _check_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFinite("table contains NaN or infinite values")


def fit_scaler(table: DataTable, bins: int) -> Scaler:
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if len(table) == 0:
        raise EmptyTable("cannot fit a scaler on an empty table")
    _check_finite(table.rows)
    return Scaler(
        table.column_names,
        table.rows.min(axis=0),
        table.rows.max(axis=0),
        int(bins),
    )


def bin_indices(scaler: Scaler, values: np.ndarray) -> np.ndarray:
    """Vectorized bin lookup for an ``n x num_attributes`` value matrix."""
    values = np.asarray(values, dtype=np.float64)
    _check_finite(values)
    width = scaler.beta - scaler.alpha
    safe = np.where(width > 0, width, 1.0)
    raw = np.floor(scaler.bins * (values - scaler.alpha) / safe)
    raw = np.where(width > 0, raw, 0.0)
    return np.clip(raw, 0, scaler.bins - 1).astype(np.int64)


def bin_index(scaler: Scaler, attribute: int, value: float) -> int:
    """Bin of ``value`` for one attribute; out-of-range values clamp to the edge bins."""
    if not 0 <= attribute < scaler.num_attributes:
        raise IndexError(f"attribute {attribute} not in [0, {scaler.num_attributes})")
    if not math.isfinite(value):
        raise NonFinite(f"value {value!r} is not finite")
    lo, hi = scaler.alpha[attribute], scaler.beta[attribute]
    if hi <= lo:
        return 0
    i = math.floor(scaler.bins * (value - lo) / (hi - lo))
    return min(max(i, 0), scaler.bins - 1)


def binarize(scaler: Scaler, table: DataTable) -> FormalContext:
    """One object per row, one feature per attribute (the row's bin)."""
    if table.column_names != scaler.column_names:
        raise ColumnMismatch(
            f"table columns {list(table.column_names)} != scaler columns {list(scaler.column_names)}"
        )
    codes = bin_indices(scaler, table.rows)
    n = len(table)
    inc = np.zeros((n, scaler.num_features), dtype=bool)
    if n:
        cols = codes + np.arange(scaler.num_attributes) * scaler.bins
        inc[np.arange(n)[:, None], cols] = True
    return context_from_incidence(inc, table.record_ids, scaler.feature_names(), scaler.blocks())

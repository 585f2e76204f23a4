"""Split / fit / score / measure, as used by the ``eval`` command."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .agendas import AgendaSpace
from .errors import DegenerateLabels
from .metrics import roc_auc, stratified_split, tpr_fpr
from .scaling import DataTable, fit_scaler
from .sup import TrainConfig, fit_sup
from .unsup import fit_unsup

log = logging.getLogger(__name__)


def fit_on_split(
    table: DataTable,
    bins: int,
    alpha: int = 2,
    include_full: bool = True,
    gamma: Optional[float] = None,
    seed: int = 0,
    train_fraction: Optional[float] = 0.8,
    supervised: bool = False,
    config: Optional[TrainConfig] = None,
    space: Optional[AgendaSpace] = None,
    scale_on_all: bool = False,
    threads=None,
):
    """Fit a model on the stratified training part of ``table``.

    ``train_fraction=None`` trains on every row (no held-out part). Returns
    ``(model, train_indices, test_indices)``.
    """
    n = len(table)
    if train_fraction is None:
        train_idx, test_idx = np.arange(n), np.arange(0)
    else:
        if table.labels is None:
            raise DegenerateLabels("a stratified split needs a label column")
        split = stratified_split(table.labels, train_fraction, seed)
        train_idx, test_idx = split.train_indices, split.test_indices
    train = table.take(train_idx)
    scaler = fit_scaler(table if scale_on_all else train, bins)
    meta = {"seed": int(seed), "train_fraction": train_fraction, "scale_on_all": bool(scale_on_all)}
    if supervised:
        config = config or TrainConfig(seed=seed)
        model = fit_sup(train, bins, alpha, include_full, gamma, config, space=space,
                        scaler=scaler, meta=meta, threads=threads)
    else:
        model = fit_unsup(train, bins, alpha, include_full, gamma, seed, space=space,
                          scaler=scaler, meta=meta)
    return model, train_idx, test_idx


def evaluate(
    table: DataTable,
    bins: int,
    alpha: int = 2,
    include_full: bool = True,
    gamma: Optional[float] = None,
    seed: int = 0,
    train_fraction: float = 0.8,
    supervised: bool = False,
    config: Optional[TrainConfig] = None,
    threshold: float = 0.5,
    space: Optional[AgendaSpace] = None,
    scale_on_all: bool = False,
    threads=None,
) -> dict:
    """Held-out metrics plus per-object test scores."""
    model, train_idx, test_idx = fit_on_split(
        table, bins, alpha, include_full, gamma, seed, train_fraction,
        supervised, config, space, scale_on_all, threads,
    )
    test = table.take(test_idx)
    scores = model.score(test, threads=threads)
    auc = roc_auc(scores, test.labels)
    tpr, fpr = tpr_fpr(scores, test.labels, threshold)
    log.info("eval: auc=%.4f tpr=%.4f fpr=%.4f", auc, tpr, fpr)
    return {
        "auc": auc,
        "tpr": tpr,
        "fpr": fpr,
        "threshold": threshold,
        "n_train": int(len(train_idx)),
        "n_test": int(len(test_idx)),
        "seed": int(seed),
        "bins": int(bins),
        "gamma": model.gamma,
        "model": model,
        "test_ids": test.record_ids,
        "scores": scores,
    }

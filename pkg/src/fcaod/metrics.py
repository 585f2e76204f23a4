"""Stratified splitting and ranking metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, EmptyLabels, LengthMismatch

SPLIT_STREAM = 0


@dataclass(frozen=True, eq=False)
class Split:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int


def stratified_split(labels, train_fraction: float = 0.8, seed: int = 0) -> Split:
    """Shuffle outliers and inliers separately; ``floor(fraction * n_class)`` of each go to train.

    Index arrays are returned sorted, so row order is preserved within each side.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise EmptyLabels("cannot split an empty label vector")
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng([int(seed), SPLIT_STREAM])
    train, test = [], []
    for cls in (1, 0):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        k = int(np.floor(train_fraction * len(idx)))
        train.append(idx[:k])
        test.append(idx[k:])
    return Split(np.sort(np.concatenate(train)), np.sort(np.concatenate(test)), int(seed))


def _scores_labels(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise LengthMismatch(f"{scores.size} scores for {labels.size} labels")
    pos = labels == 1
    if pos.all() or not pos.any():
        raise DegenerateLabels("need at least one outlier and one inlier")
    return scores, pos


def roc_auc(scores, labels) -> float:
    """P(random outlier outscores random inlier), ties counted half.

    Computed from midranks (Mann-Whitney U), O(n log n).
    """
    scores, pos = _scores_labels(scores, labels)
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores))
    # midrank for each run of tied scores
    _, first, counts = np.unique(sorted_scores, return_index=True, return_counts=True)
    mid = first + (counts + 1) / 2.0
    ranks[order] = np.repeat(mid, counts)
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def tpr_fpr(scores, labels, threshold: float = 0.5) -> tuple[float, float]:
    """Rates of flagged objects (``score >= threshold``) among outliers and inliers."""
    scores, pos = _scores_labels(scores, labels)
    flagged = scores >= threshold
    return float(flagged[pos].mean()), float(flagged[~pos].mean())

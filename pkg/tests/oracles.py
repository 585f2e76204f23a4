"""Independent brute-force references used by the tests.

Nothing here touches the packed-bit code paths.
"""

from itertools import product

import numpy as np


def common_features(rows, objects, features):
    """Features (within ``features``) shared by every object in ``objects``."""
    out = set(features)
    for b in objects:
        out &= rows[b]
    return out


def common_objects(rows, feats, population):
    return {b for b in population if feats <= rows[b]}


def closure(rows, objects, features, population):
    """Galois closure of an object set in the context restricted to ``features``."""
    return common_objects(rows, common_features(rows, objects, features), population)


def closure_size_scan(rows, intent, agenda, population):
    """Objects of ``population`` whose row contains ``intent & agenda``."""
    key = set(intent) & set(agenda)
    return sum(1 for b in population if key <= rows[b])


def finite_difference(f, w, h=1e-6):
    g = np.zeros_like(w)
    for t in range(len(w)):
        up, down = w.copy(), w.copy()
        up[t] += h
        down[t] -= h
        g[t] = (f(up) - f(down)) / (2 * h)
    return g


def auc_pairs(scores, labels):
    """Mann-Whitney AUC by enumerating every outlier-inlier pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for p, q in product(pos, neg):
        wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (len(pos) * len(neg))


def random_rows(rng, n_objects, n_features, density):
    inc = rng.random((n_objects, n_features)) < density
    return [set(np.flatnonzero(r).tolist()) for r in inc]

"""Synthetic datasets with known outlier structure."""

import numpy as np

from fcaod import DataTable


def planted_outliers(seed, n_inliers=500, n_outliers=15, n_attributes=4, shift=(6.0, 8.0)):
    """Gaussian cloud plus outliers pushed 6-8 spreads out on a random attribute pair each."""
    rng = np.random.default_rng(seed)
    inliers = rng.normal(size=(n_inliers, n_attributes))
    outliers = rng.normal(size=(n_outliers, n_attributes))
    for row in outliers:
        for a in rng.choice(n_attributes, 2, replace=False):
            row[a] += rng.choice([-1.0, 1.0]) * rng.uniform(*shift)
    rows = np.vstack([inliers, outliers])
    labels = np.r_[np.zeros(n_inliers), np.ones(n_outliers)].astype(np.int64)
    return DataTable(tuple(f"x{k}" for k in range(n_attributes)), rows, labels)


def joint_outliers(seed, n_inliers=600, n_outliers=30, n_noise=6, spread=0.1, gap=1.0):
    """Outliers visible only in the joint (x0, x1) view.

    Inliers sit on the diagonal x1 = x0 + small noise; outliers draw x0 and
    x1 independently from the same marginal but away from the diagonal.
    Both marginals stay standard normal, and ``n_noise`` further attributes
    are pure noise.
    """
    rng = np.random.default_rng(seed)
    n = n_inliers + n_outliers
    x0 = rng.normal(size=n)
    x1 = x0 + spread * rng.normal(size=n)
    k = n_inliers
    while k < n:
        a, b = rng.normal(size=2)
        if abs(a - b) > gap:
            x0[k], x1[k] = a, b
            k += 1
    rows = np.column_stack([x0, x1, rng.normal(size=(n, n_noise))])
    labels = np.r_[np.zeros(n_inliers), np.ones(n_outliers)].astype(np.int64)
    return DataTable(tuple(f"x{k}" for k in range(2 + n_noise)), rows, labels)

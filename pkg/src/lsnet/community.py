"""Latent-space community detection: fit the model, k-means the latent rows."""

from __future__ import annotations

import numpy as np

from .fitting import FitConfig, fit
from .initializers import InitConfig, initialize

__all__ = ["kmeans", "lscd"]


def _kmeanspp_seeds(points, num_clusters, rng):
    n = points.shape[0]
    centroids = np.empty((num_clusters, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for c in range(1, num_clusters):
        total = d2.sum()
        if total <= 0.0:
            centroids[c:] = points[rng.integers(n, size=num_clusters - c)]
            break
        centroids[c] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centroids[c]) ** 2, axis=1))
    return centroids


def _lloyd(points, centroids, max_iters=300):
    """Lloyd iterations; empty clusters are reseeded from the farthest point."""
    n, _ = points.shape
    num_clusters = centroids.shape[0]
    labels = np.full(n, -1)
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        assigned_d2 = d2[np.arange(n), new_labels]
        for c in range(num_clusters):
            mask = new_labels == c
            if mask.any():
                centroids[c] = points[mask].mean(axis=0)
            else:
                far = assigned_d2.argmax()
                centroids[c] = points[far]
                new_labels[far] = c
                assigned_d2[far] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    wcss = float(d2[np.arange(n), labels].sum())
    return labels, wcss


def kmeans(points, num_clusters, restarts=20, seed=0):
    """k-means++ / Lloyd, best of ``restarts`` runs by within-cluster sum of squares.

    Deterministic given the seed; ties between restarts keep the earliest run.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if num_clusters < 2:
        raise ValueError("need at least 2 clusters")
    if n < num_clusters:
        raise ValueError(f"cannot split {n} points into {num_clusters} clusters")
    best_labels = None
    best_wcss = np.inf
    for ss in np.random.SeedSequence(int(seed)).spawn(restarts):
        rng = np.random.default_rng(ss)
        centroids = _kmeanspp_seeds(points, num_clusters, rng)
        labels, wcss = _lloyd(points, centroids)
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return best_labels


def lscd(
    A,
    X=None,
    k_fit=None,
    num_clusters=2,
    fit_config=None,
    init_config=None,
    restarts=20,
    seed=0,
):
    """Fit the latent space model, then cluster the fitted latent vectors.

    Defaults: the fitting dimension equals the number of communities, the
    initializer is singular value thresholding and the fitter runs 500
    practical-projection iterations with eta = 0.2.

    Returns (labels, fitted ParameterSet).
    """
    if k_fit is None:
        k_fit = num_clusters
    if fit_config is None:
        fit_config = FitConfig(k=k_fit)
    elif fit_config.k != k_fit:
        raise ValueError("fit_config.k disagrees with k_fit")
    if init_config is None:
        init_config = InitConfig(method="usvt", k=k_fit)
    elif init_config.k != k_fit:
        raise ValueError("init_config.k disagrees with k_fit")
    init = initialize(A, X, init_config)
    params, _ = fit(A, X, init, fit_config)
    labels = kmeans(params.Z, num_clusters, restarts=restarts, seed=seed)
    return labels, params

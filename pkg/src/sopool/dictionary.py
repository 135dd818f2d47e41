"""Small K-means dictionary learned from whitened patches."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MOVEMENT_TOL = 1e-6  # max-norm centroid movement at which Lloyd stops


@dataclass(frozen=True)
class Dictionary:
    atoms: np.ndarray  # (K, dim), rows unit-norm unless normalization disabled
    K: int
    objective_history: tuple = field(default=(), compare=False)


def _kmeanspp_init(x: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((K, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            centroids[k] = x[rng.integers(n)]
        else:
            centroids[k] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centroids[k]) ** 2, axis=1))
    return centroids


def _assign(x: np.ndarray, x2: np.ndarray, centroids: np.ndarray):
    # squared distances via the expansion ||x||^2 - 2 x.c + ||c||^2
    half = x @ centroids.T
    half *= -2.0
    half += np.sum(centroids**2, axis=1)[None, :]
    labels = np.argmin(half, axis=1)
    d2 = x2 + half[np.arange(x.shape[0]), labels]
    return labels, np.maximum(d2, 0.0)


def _centroid_sums(x: np.ndarray, labels: np.ndarray, K: int):
    """Per-cluster sums and counts, accumulated in ascending point order."""
    counts = np.bincount(labels, minlength=K)
    sums = np.empty((K, x.shape[1]))
    for j in range(x.shape[1]):
        sums[:, j] = np.bincount(labels, weights=x[:, j], minlength=K)
    return sums, counts


def train_kmeans(
    patches: np.ndarray,
    K: int,
    iters: int = 100,
    seed: int = 0,
    normalize_atoms: bool = True,
) -> Dictionary:
    """Lloyd's K-means with K-means++ seeding.

    Iterates until centroid movement drops below MOVEMENT_TOL (max-norm) or
    ``iters`` is reached.  Empty clusters are re-seeded to the point farthest
    from its current centroid.  Final centroids are unit-normalized (unless
    disabled) and sorted lexicographically so the result is reproducible.
    """
    x = np.asarray(patches, dtype=np.float64)
    if K <= 0:
        raise ValueError("K must be positive")
    n = x.shape[0]
    if n < K:
        raise ValueError(f"need at least K={K} patches, got {n}")

    rng = np.random.Generator(np.random.Philox(key=seed))
    centroids = _kmeanspp_init(x, K, rng)
    x2 = np.sum(x**2, axis=1)
    history = []
    for _ in range(iters):
        labels, d2 = _assign(x, x2, centroids)
        history.append(float(d2.sum()))
        new_centroids = centroids.copy()
        sums, counts = _centroid_sums(x, labels, K)
        nonempty = counts > 0
        new_centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        for k in np.nonzero(~nonempty)[0]:
            new_centroids[k] = x[np.argmax(d2)]
            d2[np.argmax(d2)] = 0.0
        movement = np.max(np.abs(new_centroids - centroids))
        centroids = new_centroids
        if movement < MOVEMENT_TOL:
            break

    _, d2 = _assign(x, x2, centroids)
    history.append(float(d2.sum()))

    atoms = centroids
    if normalize_atoms:
        norms = np.linalg.norm(atoms, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        atoms = atoms / norms
    order = np.lexsort(atoms.T[::-1])
    atoms = atoms[order]
    return Dictionary(atoms=atoms, K=K, objective_history=tuple(history))

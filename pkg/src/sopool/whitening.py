"""ZCA whitening of normalized patch vectors.

The transform is fit once on a pool of training patches and applied to every
patch before dictionary learning and encoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ZcaTransform:
    mean: np.ndarray  # (dim,)
    matrix: np.ndarray  # (dim, dim) symmetric positive definite
    eps_zca: float


def _fix_eigvec_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each eigenvector so its first nonzero component is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def fit_zca(patches: np.ndarray, eps_zca: float = 0.1) -> ZcaTransform:
    """Fit M = E (L + eps I)^(-1/2) E^T from the patch sample covariance.

    Covariance is the population estimate C = Xc^T Xc / n.  Eigenvalues come
    out ascending with a fixed eigenvector sign convention, so the fit is
    deterministic for a given sample.
    """
    x = np.asarray(patches, dtype=np.float64)
    n, dim = x.shape
    if n < dim:
        raise ValueError(
            f"need at least {dim} patches to estimate a {dim}x{dim} covariance, got {n}"
        )
    mean = x.mean(axis=0)
    xc = x - mean
    cov = (xc.T @ xc) / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvecs = _fix_eigvec_signs(eigvecs)
    scaled = eigvecs * (eigvals + eps_zca) ** -0.5
    matrix = scaled @ eigvecs.T
    matrix = 0.5 * (matrix + matrix.T)
    return ZcaTransform(mean=mean, matrix=matrix, eps_zca=float(eps_zca))


def apply_zca(t: ZcaTransform, patches: np.ndarray) -> np.ndarray:
    """Map rows x -> (x - mean) @ matrix."""
    x = np.asarray(patches, dtype=np.float64)
    if x.shape[-1] != t.mean.shape[0]:
        raise ValueError(
            f"patch dimension {x.shape[-1]} does not match transform dimension {t.mean.shape[0]}"
        )
    return (x - t.mean) @ t.matrix


def subsample_rows(x: np.ndarray, max_rows: int, seed: int) -> np.ndarray:
    """Deterministic uniform subsample used to bound the fitting pool."""
    if x.shape[0] <= max_rows:
        return x
    rng = np.random.Generator(np.random.Philox(key=seed))
    idx = np.sort(rng.choice(x.shape[0], size=max_rows, replace=False))
    return x[idx]

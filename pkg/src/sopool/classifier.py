"""Closed-form multi-class ridge regression over pooled descriptors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class RidgeModel:
    weights: np.ndarray  # (dim, n_classes)
    classes: tuple  # ordered subject ids
    lam: float


def _one_hot(labels, classes) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    y = np.zeros((len(labels), len(classes)))
    for row, label in enumerate(labels):
        y[row, index[label]] = 1.0
    return y


def _check_residual(a: np.ndarray, z: np.ndarray, y: np.ndarray) -> None:
    # guard against a silently inaccurate factorization
    resid = np.linalg.norm(a @ z - y, axis=0)
    scale = np.linalg.norm(y, axis=0)
    scale[scale == 0] = 1.0
    worst = np.max(resid / scale)
    if worst > RESIDUAL_TOL:
        raise np.linalg.LinAlgError(
            f"ridge solve residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )


def train_ridge(x: np.ndarray, labels, lam: float = 1.0) -> RidgeModel:
    """Fit W minimizing ||X W - Y||^2 + lam ||W||^2 in closed form.

    Y is the one-hot label matrix.  With N <= D the dual form
    W = X^T (X X^T + lam I)^{-1} Y is used (an O(N^3) solve); otherwise the
    primal W = (X^T X + lam I)^{-1} X^T Y.  Both are algebraically identical.
    """
    x = np.asarray(x, dtype=np.float64)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise ValueError("need at least 2 distinct classes")
    y = _one_hot(labels, classes)
    n, dim = x.shape
    if n <= dim:
        gram = x @ x.T
        gram[np.diag_indices_from(gram)] += lam
        z = cho_solve(cho_factor(gram), y)
        _check_residual(gram, z, y)
        weights = x.T @ z
    else:
        gram = x.T @ x
        gram[np.diag_indices_from(gram)] += lam
        xty = x.T @ y
        weights = cho_solve(cho_factor(gram), xty)
        _check_residual(gram, weights, xty)
    return RidgeModel(weights=weights, classes=classes, lam=float(lam))


def scores(model: RidgeModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.weights.shape[0]:
        raise ValueError(
            f"descriptor dimension {x.shape[1]} does not match model "
            f"dimension {model.weights.shape[0]}"
        )
    return x @ model.weights


def predict(model: RidgeModel, x: np.ndarray):
    """Argmax class of the linear scores; ties break to the lowest class index."""
    s = scores(model, x)
    picks = [model.classes[i] for i in np.argmax(s, axis=1)]
    return picks[0] if np.asarray(x).ndim == 1 else picks

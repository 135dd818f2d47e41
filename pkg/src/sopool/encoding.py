"""Split soft-threshold encoding of whitened patches against the dictionary.

Each patch x maps to a non-negative 2K-vector:
    code[j]     = max(0,  <d_j, x> - alpha)
    code[j + K] = max(0, -<d_j, x> - alpha)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary


@dataclass(frozen=True)
class EncodedFeatures:
    codes: np.ndarray  # (n_patches, width) non-negative
    grid_coords: np.ndarray  # inherited from the PatchSet
    alpha: float | None  # None in passthrough mode

    @property
    def width(self) -> int:
        return self.codes.shape[1]


def encode(patches: np.ndarray, grid_coords: np.ndarray, dictionary: Dictionary,
           alpha: float = 0.25) -> EncodedFeatures:
    """Soft-threshold encode patch rows into 2K non-negative responses."""
    x = np.asarray(patches, dtype=np.float64)
    if x.shape[1] != dictionary.atoms.shape[1]:
        raise ValueError(
            f"patch dimension {x.shape[1]} does not match atom dimension "
            f"{dictionary.atoms.shape[1]}"
        )
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    proj = x @ dictionary.atoms.T
    codes = np.concatenate(
        [np.maximum(0.0, proj - alpha), np.maximum(0.0, -proj - alpha)], axis=1
    )
    return EncodedFeatures(codes=codes, grid_coords=grid_coords, alpha=float(alpha))


def passthrough(patches: np.ndarray, grid_coords: np.ndarray) -> EncodedFeatures:
    """No-encoding ablation: pooled features are the raw whitened patches."""
    return EncodedFeatures(
        codes=np.asarray(patches, dtype=np.float64).copy(),
        grid_coords=grid_coords,
        alpha=None,
    )

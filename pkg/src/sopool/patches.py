"""Dense overlapped patch extraction and per-patch contrast normalization.

Each image yields an l_rows x l_cols grid of r x r patches on a stride-s
lattice, with l = floor((side - r) / s + 1) per axis.  Every patch is
flattened row-major and normalized to zero mean, unit population standard
deviation; near-constant patches map to the zero vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VAR_FLOOR = 1e-8  # std below this treats the patch as constant


@dataclass(frozen=True)
class PatchSet:
    """Normalized patch vectors of one image with their grid coordinates."""

    vectors: np.ndarray  # (n_patches, r*r)
    grid_coords: np.ndarray  # (n_patches, 2) int (row, col) in the patch grid
    patch_side: int
    stride: int
    grid_rows: int
    grid_cols: int

    @property
    def grid_side(self) -> int:
        if self.grid_rows != self.grid_cols:
            raise ValueError("patch grid is not square")
        return self.grid_rows


def grid_dims(rows: int, cols: int, r: int, s: int) -> tuple[int, int]:
    if r > rows or r > cols:
        raise ValueError(f"patch side {r} exceeds image size {rows}x{cols}")
    if s < 1:
        raise ValueError("stride must be >= 1")
    return (rows - r) // s + 1, (cols - r) // s + 1


def normalize_patches(vectors: np.ndarray) -> np.ndarray:
    """Per-row brightness/contrast normalization: (x - mean) / population std."""
    x = np.asarray(vectors, dtype=np.float64)
    m = x.mean(axis=1, keepdims=True)
    v = x.std(axis=1, keepdims=True)  # population (divide-by-n) std
    centered = x - m
    out = np.where(v > VAR_FLOOR, centered / np.where(v > VAR_FLOOR, v, 1.0), 0.0)
    return out


def normalize_patch(x: np.ndarray) -> np.ndarray:
    """Normalize a single patch vector."""
    if np.asarray(x).size == 0:
        raise ValueError("patch vector is empty")
    return normalize_patches(np.atleast_2d(x))[0]


def extract_patches(pixels: np.ndarray, r: int, s: int = 1, normalize: bool = True) -> PatchSet:
    """Extract all r x r patches of an image on a stride-s grid.

    The patch at grid position (i, j) covers image rows [i*s, i*s + r) and
    columns [j*s, j*s + r); output rows are ordered row-major by (i, j).
    """
    px = np.ascontiguousarray(pixels, dtype=np.float64)
    rows, cols = px.shape
    l_rows, l_cols = grid_dims(rows, cols, r, s)
    windows = np.lib.stride_tricks.sliding_window_view(px, (r, r))[::s, ::s]
    vectors = windows.reshape(l_rows * l_cols, r * r)
    if normalize:
        vectors = normalize_patches(vectors)
    else:
        vectors = vectors.copy()
    ii, jj = np.meshgrid(np.arange(l_rows), np.arange(l_cols), indexing="ij")
    coords = np.stack([ii.ravel(), jj.ravel()], axis=1)
    return PatchSet(
        vectors=vectors,
        grid_coords=coords,
        patch_side=r,
        stride=s,
        grid_rows=l_rows,
        grid_cols=l_cols,
    )

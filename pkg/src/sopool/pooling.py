"""Second-order pooling over a spatial pyramid with a log-Euclidean mapping.

For each pyramid grid, encoded features are partitioned into cells by their
patch-grid coordinates.  Each cell averages the outer products f f^T, is
ridged to strict positive definiteness, mapped through the symmetric matrix
logarithm, and vectorized isometrically; cell vectors concatenate into the
final image descriptor.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .encoding import EncodedFeatures

DESCRIPTOR_MAGIC = b"SOPD"
DESCRIPTOR_VERSION = 1


@dataclass(frozen=True)
class PyramidConfig:
    grids: tuple  # ascending grid sides, e.g. (1, 2, 4, 6, 8)
    eps_spd: float = 1e-3

    def __post_init__(self):
        g = tuple(int(v) for v in self.grids)
        if not g or any(v < 1 for v in g) or any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("grids must be non-empty, strictly increasing, all >= 1")
        object.__setattr__(self, "grids", g)

    @property
    def n_cells(self) -> int:
        return sum(g * g for g in self.grids)


@dataclass(frozen=True)
class PooledDescriptor:
    values: np.ndarray  # (n_cells * p(p+1)/2,)
    l2_normalized: bool


def descriptor_length(p: int, grids) -> int:
    """Closed-form descriptor length: (sum of g^2) * p(p+1)/2."""
    return sum(g * g for g in grids) * p * (p + 1) // 2


def pool_cell(codes: np.ndarray, eps_spd: float) -> np.ndarray:
    """Average of outer products over one cell, plus an eps_spd ridge.

    An empty cell yields eps_spd * I sized by the code width (which the
    caller must supply via a (0, p) array).
    """
    f = np.asarray(codes, dtype=np.float64)
    p = f.shape[1]
    if f.shape[0] == 0:
        return eps_spd * np.eye(p)
    out = (f.T @ f) / f.shape[0]
    out = 0.5 * (out + out.T)
    out[np.diag_indices_from(out)] += eps_spd
    return out


def log_spd(mat: np.ndarray, context: str = "") -> np.ndarray:
    """Matrix logarithm of a symmetric positive definite matrix.

    Uses the symmetric eigendecomposition F = E L E^T -> E log(L) E^T.
    """
    f = np.asarray(mat, dtype=np.float64)
    where = f" ({context})" if context else ""
    if not np.all(np.isfinite(f)):
        raise ValueError(f"non-finite pooled matrix{where}")
    if np.max(np.abs(f - f.T)) > 1e-8:
        raise ValueError(f"pooled matrix is not symmetric{where}")
    eigvals, eigvecs = np.linalg.eigh(f)
    if eigvals[0] <= 0:
        raise ValueError(f"pooled matrix is not positive definite{where}: "
                         f"min eigenvalue {eigvals[0]:.3e}")
    out = (eigvecs * np.log(eigvals)) @ eigvecs.T
    return 0.5 * (out + out.T)


def exp_sym(mat: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix, same eigendecomposition route."""
    f = np.asarray(mat, dtype=np.float64)
    eigvals, eigvecs = np.linalg.eigh(f)
    out = (eigvecs * np.exp(eigvals)) @ eigvecs.T
    return 0.5 * (out + out.T)


def vectorize_symmetric(mat: np.ndarray) -> np.ndarray:
    """Upper-triangle vectorization with off-diagonal entries scaled by sqrt 2.

    Isometric for the Frobenius inner product: <vec(A), vec(B)> = trace(A B).
    """
    p = mat.shape[0]
    iu = np.triu_indices(p)
    out = mat[iu].copy()
    out[iu[0] != iu[1]] *= np.sqrt(2.0)
    return out


def cell_index(coord: int, grid: int, extent: int) -> int:
    """Pyramid cell along one axis for a patch-grid coordinate."""
    return min(coord * grid // extent, grid - 1)


def pool_pyramid(
    feats: EncodedFeatures,
    grid_rows: int,
    cfg: PyramidConfig,
    grid_cols: int | None = None,
    l2_normalize: bool = True,
) -> PooledDescriptor:
    """Pool, log-map, and concatenate descriptors over every pyramid cell.

    Cells are ordered by (grid, cell row-major).  Per-cell sums accumulate in
    ascending feature index order, so the result is independent of scheduling.
    """
    if grid_cols is None:
        grid_cols = grid_rows
    codes = feats.codes
    if codes.shape[0] == 0:
        raise ValueError("cannot pool an empty feature set")
    p = codes.shape[1]
    coords = feats.grid_coords
    pieces = []
    for g in cfg.grids:
        rows = np.minimum(coords[:, 0] * g // grid_rows, g - 1)
        cols = np.minimum(coords[:, 1] * g // grid_cols, g - 1)
        cell_of = rows * g + cols
        order = np.argsort(cell_of, kind="stable")
        sorted_cells = cell_of[order]
        bounds = np.searchsorted(sorted_cells, np.arange(g * g + 1))
        for c in range(g * g):
            members = order[bounds[c] : bounds[c + 1]]
            # canonical accumulation order: ascending grid coordinate, so the
            # result is bit-identical under any feature-row permutation
            members = members[np.lexsort((coords[members, 1], coords[members, 0]))]
            pooled = pool_cell(codes[members] if members.size else codes[:0], cfg.eps_spd)
            logged = log_spd(pooled, context=f"grid {g}x{g}, cell {c}")
            pieces.append(vectorize_symmetric(logged))
    values = np.concatenate(pieces)
    assert values.shape[0] == descriptor_length(p, cfg.grids)
    if l2_normalize:
        norm = np.linalg.norm(values)
        if norm > 0:
            values = values / norm
    return PooledDescriptor(values=values, l2_normalized=l2_normalize)


def write_descriptor(path, desc: PooledDescriptor, p: int, n_cells: int) -> None:
    """Export as little-endian float32 with a 16-byte SOPD header."""
    header = struct.pack("<4sIII", DESCRIPTOR_MAGIC, DESCRIPTOR_VERSION, p, n_cells)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(desc.values.astype("<f4").tobytes())


def read_descriptor(path) -> tuple[np.ndarray, int, int]:
    """Read an SOPD file; returns (values, p, n_cells)."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        magic, version, p, n_cells = struct.unpack("<4sIII", header)
        if magic != DESCRIPTOR_MAGIC:
            raise ValueError(f"{path}: bad descriptor magic {magic!r}")
        if version != DESCRIPTOR_VERSION:
            raise ValueError(f"{path}: unsupported descriptor version {version}")
        values = np.frombuffer(fh.read(), dtype="<f4").astype(np.float64)
    expected = n_cells * p * (p + 1) // 2
    if values.shape[0] != expected:
        raise ValueError(f"{path}: expected {expected} values, got {values.shape[0]}")
    return values, p, n_cells

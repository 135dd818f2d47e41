"""Soft-threshold codes and log-Euclidean second-order pooling.

Shows the split-rectifier encoding of whitened patches and how per-cell
outer-product averages become the final pyramid descriptor.
"""

import numpy as np

from sopool.dictionary import train_kmeans
from sopool.encoding import encode, passthrough
from sopool.patches import extract_patches
from sopool.pooling import PyramidConfig, descriptor_length, exp_sym, log_spd, pool_cell, pool_pyramid
from sopool.whitening import apply_zca, fit_zca

rng = np.random.default_rng(0)
image = rng.uniform(size=(64, 64))

ps = extract_patches(image, r=6, s=1)
zca = fit_zca(ps.vectors, eps_zca=0.1)
white = apply_zca(zca, ps.vectors)
dico = train_kmeans(white, K=20, seed=3)

feats = encode(white, ps.grid_coords, dico, alpha=0.25)
print(f"codes: {feats.codes.shape} (2K = {feats.width}), "
      f"sparsity {np.mean(feats.codes == 0):.0%} zeros")

# one cell: average outer product, ridged, then the matrix log
cell = pool_cell(feats.codes[:100], eps_spd=1e-3)
logged = log_spd(cell)
roundtrip = np.linalg.norm(exp_sym(logged) - cell) / np.linalg.norm(cell)
print(f"cell matrix {cell.shape}, exp(log(F)) relative error {roundtrip:.1e}")

# the full 5-level pyramid
cfg = PyramidConfig(grids=(1, 2, 4, 6, 8), eps_spd=1e-3)
desc = pool_pyramid(feats, ps.grid_rows, cfg)
print(f"descriptor: {desc.values.shape[0]} dims "
      f"(= {cfg.n_cells} cells x {feats.width * (feats.width + 1) // 2}), "
      f"L2 norm {np.linalg.norm(desc.values):.3f}")

# the no-encoding ablation pools the raw whitened patches (p = 36)
raw = pool_pyramid(passthrough(white, ps.grid_coords), ps.grid_rows, cfg)
print(f"passthrough descriptor: {raw.values.shape[0]} dims "
      f"(closed form {descriptor_length(36, cfg.grids)})")

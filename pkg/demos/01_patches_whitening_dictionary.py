"""From raw pixels to a whitened patch codebook.

Generates a small synthetic face corpus, extracts dense normalized patches
from one image, fits the ZCA transform, and learns a 20-atom dictionary.
"""

import tempfile

import numpy as np

from sopool.dataset import load_corpus
from sopool.dictionary import train_kmeans
from sopool.patches import extract_patches
from sopool.synth import make_corpus
from sopool.whitening import apply_zca, fit_zca

with tempfile.TemporaryDirectory() as tmp:
    make_corpus(tmp, subjects=4, per_subject=5, seed=7, side=64)
    images = load_corpus(tmp, 64)

print(f"corpus: {len(images)} images of {images[0].side}x{images[0].side}")

# 6x6 patches at stride 1 -> a 59x59 grid of 3481 patches per image
ps = extract_patches(images[0].pixels, r=6, s=1)
print(f"patches: {ps.vectors.shape[0]} of dim {ps.vectors.shape[1]} "
      f"(grid {ps.grid_rows}x{ps.grid_cols})")
print(f"per-patch mean ~0: {np.abs(ps.vectors.mean(axis=1)).max():.2e}")

# pool patches over the whole corpus for the whitening / dictionary fit
pool = np.vstack([extract_patches(im.pixels, 6, 1).vectors for im in images])
zca = fit_zca(pool, eps_zca=0.1)
white = apply_zca(zca, pool)
cov = (white - white.mean(axis=0)).T @ (white - white.mean(axis=0)) / white.shape[0]
print(f"whitened covariance diagonal mean: {np.diag(cov).mean():.3f}")

dico = train_kmeans(white, K=20, seed=1)
print(f"dictionary: {dico.K} unit-norm atoms, "
      f"K-means objective {dico.objective_history[0]:.3e} -> "
      f"{dico.objective_history[-1]:.3e} over {len(dico.objective_history) - 1} iterations")

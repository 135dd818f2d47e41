"""Deterministic synthetic identity corpora for desk-scale testing.

Each subject gets a base pattern; each image is a perturbed rendering of it
(illumination scale/offset, small spatial shift, pixel noise).  Two styles:

* ``blob`` - smooth low-frequency random pattern per subject; inter-subject
  distance far exceeds the perturbation scale, so the corpus is separable.
* ``textured`` - per-subject mixtures of oriented sinusoidal gratings under
  heavy pixel noise; class identity lives in texture statistics rather than
  gross layout, and the noise level is chosen so thresholded codes separate
  the classes more reliably than raw second-order patch statistics.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import bilinear_resize, write_pgm

STYLES = ("blob", "textured")


def _rng(seed: int, *parts) -> np.random.Generator:
    key = seed
    for p in parts:
        key = (key * 1_000_003 + int(p) + 1) % 2**128
    return np.random.Generator(np.random.Philox(key=key))


def _blob_base(rng: np.random.Generator, side: int) -> np.ndarray:
    coarse = rng.uniform(0.0, 1.0, size=(8, 8))
    base = bilinear_resize(coarse, side, side)
    lo, hi = base.min(), base.max()
    if hi > lo:
        base = (base - lo) / (hi - lo)
    return 0.15 + 0.7 * base


def _textured_base(rng: np.random.Generator, side: int) -> np.ndarray:
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    img = np.zeros((side, side))
    for _ in range(3):
        theta = rng.uniform(0, np.pi)
        freq = rng.uniform(0.25, 0.9)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(0.5, 1.0)
        img += amp * np.sin(freq * (xx * np.cos(theta) + yy * np.sin(theta)) + phase)
    img = (img - img.min()) / (img.max() - img.min())
    return 0.2 + 0.6 * img


def _perturb(base: np.ndarray, rng: np.random.Generator, noise: float,
             max_shift: int) -> np.ndarray:
    a = rng.uniform(0.85, 1.15)
    b = rng.uniform(-0.06, 0.06)
    img = a * base + b
    dy, dx = rng.integers(-max_shift, max_shift + 1, size=2)
    img = np.roll(img, (dy, dx), axis=(0, 1))
    img = img + rng.normal(0.0, noise, size=img.shape)
    return np.clip(img, 0.0, 1.0)


def make_corpus(out_dir, subjects: int, per_subject: int, seed: int,
                side: int = 64, style: str = "blob") -> Path:
    """Write a `root/<subject>/<image>.pgm` corpus; fully seed-determined."""
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; choose from {STYLES}")
    noise = 0.02 if style == "blob" else 0.30
    max_shift = 2 if style == "blob" else 1
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in range(subjects):
        subj_rng = _rng(seed, 0, s)
        base = _blob_base(subj_rng, side) if style == "blob" else _textured_base(subj_rng, side)
        subj_dir = out / f"subj_{s:03d}"
        subj_dir.mkdir(exist_ok=True)
        for i in range(per_subject):
            img = _perturb(base, _rng(seed, 1, s, i), noise, max_shift)
            write_pgm(subj_dir / f"img_{i:02d}.pgm", img)
    return out

import numpy as np
import pytest

from sopool.dataset import GrayImage
from sopool.synth import make_corpus


def toy_images(n_subjects, per_subject, side=16, seed=0):
    """In-memory GrayImages without touching disk."""
    rng = np.random.default_rng(seed)
    images = []
    for s in range(n_subjects):
        base = rng.uniform(0.2, 0.8, size=(side, side))
        for i in range(per_subject):
            px = np.clip(base + rng.normal(0, 0.02, size=(side, side)), 0, 1)
            images.append(GrayImage(px, f"subj_{s:03d}", f"mem://{s}/{i}"))
    return images


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus") / "small"
    make_corpus(out, subjects=6, per_subject=5, seed=42, side=32)
    return out

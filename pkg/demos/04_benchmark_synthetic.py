"""The full benchmark protocol on a synthetic corpus.

Runs random 3-train/2-test splits over a generated identity corpus, then
the encoding-vs-no-encoding ablation on shared splits.  Desk-scale settings
keep this under a minute; drop the overrides for the paper-style defaults
(64x64, K=20, 5-level pyramid, 5/2 splits).
"""

import tempfile

from sopool.dataset import load_corpus
from sopool.pipeline import PipelineConfig, ablate_encoding, benchmark
from sopool.synth import make_corpus

cfg = PipelineConfig(
    target_side=32, K=8, grids=(1, 2, 4),
    runs=3, train_per_subject=3, test_per_subject=2, seed=5,
)

with tempfile.TemporaryDirectory() as tmp:
    make_corpus(tmp, subjects=8, per_subject=6, seed=9, side=32, style="textured")
    images = load_corpus(tmp, cfg.target_side)

    report = benchmark(images, cfg)
    print(report.to_text())

    result = ablate_encoding(images, cfg)
    w = result["with_encoding"]
    wo = result["without_encoding"]
    print(f"with encoding:    {100 * w.mean:.1f} +/- {100 * w.std:.1f} %")
    print(f"without encoding: {100 * wo.mean:.1f} +/- {100 * wo.std:.1f} %")

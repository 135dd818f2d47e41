"""Second-order pooling face identification.

Raw grayscale images -> dense normalized patches -> ZCA whitening -> small
K-means dictionary -> split soft-threshold codes -> per-pyramid-cell
second-order pooling with a log-Euclidean mapping -> ridge classification.
"""

from .classifier import RidgeModel, predict, train_ridge
from .dataset import GrayImage, Split, SplitSpec, load_corpus, make_splits
from .dictionary import Dictionary, train_kmeans
from .encoding import EncodedFeatures, encode, passthrough
from .patches import PatchSet, extract_patches, normalize_patch
from .pipeline import (
    BenchmarkReport,
    Model,
    PipelineConfig,
    ablate_encoding,
    ablate_grid,
    benchmark,
    evaluate,
    fit_pipeline,
)
from .pooling import (
    PooledDescriptor,
    PyramidConfig,
    descriptor_length,
    log_spd,
    pool_cell,
    pool_pyramid,
)
from .whitening import ZcaTransform, apply_zca, fit_zca

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport",
    "Dictionary",
    "EncodedFeatures",
    "GrayImage",
    "Model",
    "PatchSet",
    "PipelineConfig",
    "PooledDescriptor",
    "PyramidConfig",
    "RidgeModel",
    "Split",
    "SplitSpec",
    "ZcaTransform",
    "ablate_encoding",
    "ablate_grid",
    "apply_zca",
    "benchmark",
    "descriptor_length",
    "encode",
    "evaluate",
    "extract_patches",
    "fit_pipeline",
    "fit_zca",
    "load_corpus",
    "log_spd",
    "make_splits",
    "normalize_patch",
    "passthrough",
    "pool_cell",
    "pool_pyramid",
    "predict",
    "train_kmeans",
    "train_ridge",
]

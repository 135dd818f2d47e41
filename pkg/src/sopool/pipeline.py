"""End-to-end orchestration: fit, evaluate, benchmark, and ablations.

The fit sequence per training set is: dense patches -> ZCA fit -> K-means
dictionary -> soft-threshold encoding (or raw-patch passthrough) -> pyramid
second-order pooling -> ridge classifier.  Benchmarks repeat it over
independent random splits and aggregate mean and population std accuracy.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import classifier, dictionary as dict_mod, encoding, model_io, patches, pooling, whitening
from .dataset import GrayImage, Split, SplitSpec, excluded_subjects, make_splits

MAX_FIT_PATCHES = 500_000

THREADS_ENV = "SOPOOL_THREADS"


@dataclass(frozen=True)
class PipelineConfig:
    target_side: int = 64
    r: int = 6
    s: int = 1
    K: int = 20
    alpha: float = 0.25
    grids: tuple = (1, 2, 4, 6, 8)
    eps_zca: float = 0.1
    eps_spd: float = 1e-3
    lam: float = 1.0
    l2_normalize: bool = True
    encoding_mode: str = "encode"  # encode | passthrough
    normalize_atoms: bool = True
    shared_dictionary: bool = False
    seed: int = 0
    runs: int = 5
    train_per_subject: int = 5
    test_per_subject: int = 2

    def __post_init__(self):
        object.__setattr__(self, "grids", tuple(int(g) for g in self.grids))
        if self.encoding_mode not in ("encode", "passthrough"):
            raise ValueError(f"unknown encoding_mode {self.encoding_mode!r}")
        if self.target_side < self.r + 1:
            raise ValueError("target_side must be at least r + 1")

    @property
    def code_width(self) -> int:
        return 2 * self.K if self.encoding_mode == "encode" else self.r * self.r

    @property
    def pyramid(self) -> pooling.PyramidConfig:
        return pooling.PyramidConfig(grids=self.grids, eps_spd=self.eps_spd)

    @property
    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_per_subject, self.test_per_subject, self.runs, self.seed)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                lines.append(f"{f.name}=" + ",".join(str(g) for g in v))
            else:
                lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in kinds:
                raise ValueError(f"unknown config key {key!r}")
            kind = kinds[key]
            if kind == "int":
                kwargs[key] = int(raw)
            elif kind == "float":
                kwargs[key] = float(raw)
            elif kind == "bool":
                kwargs[key] = raw == "True"
            elif kind == "tuple":
                kwargs[key] = tuple(int(v) for v in raw.split(","))
            else:
                kwargs[key] = raw.strip("'\"")
        return cls(**kwargs)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass
class Model:
    cfg: PipelineConfig
    zca: whitening.ZcaTransform
    dictionary: dict_mod.Dictionary | None
    ridge: classifier.RidgeModel
    timings: dict = field(default_factory=dict, compare=False)

    def save(self, path) -> None:
        atoms = (
            self.dictionary.atoms
            if self.dictionary is not None
            else np.zeros((0, self.zca.mean.shape[0]))
        )
        model_io.write_model(
            path,
            self.cfg.to_text(),
            self.zca.mean,
            self.zca.matrix,
            atoms,
            self.ridge.weights,
            self.ridge.classes,
        )

    @classmethod
    def load(cls, path) -> "Model":
        text, mean, matrix, atoms, weights, classes = model_io.read_model(path)
        cfg = PipelineConfig.from_text(text)
        zca = whitening.ZcaTransform(mean=mean, matrix=matrix, eps_zca=cfg.eps_zca)
        dico = (
            dict_mod.Dictionary(atoms=atoms, K=atoms.shape[0]) if atoms.shape[0] else None
        )
        ridge = classifier.RidgeModel(weights=weights, classes=tuple(classes), lam=cfg.lam)
        return cls(cfg=cfg, zca=zca, dictionary=dico, ridge=ridge)


def worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _encode_image(image: GrayImage, cfg: PipelineConfig, zca, dico) -> encoding.EncodedFeatures:
    ps = patches.extract_patches(image.pixels, cfg.r, cfg.s)
    white = whitening.apply_zca(zca, ps.vectors)
    if cfg.encoding_mode == "encode":
        return encoding.encode(white, ps.grid_coords, dico, cfg.alpha), ps
    return encoding.passthrough(white, ps.grid_coords), ps


def image_descriptor(image: GrayImage, cfg: PipelineConfig, zca, dico) -> np.ndarray:
    feats, ps = _encode_image(image, cfg, zca, dico)
    desc = pooling.pool_pyramid(
        feats, ps.grid_rows, cfg.pyramid, ps.grid_cols, l2_normalize=cfg.l2_normalize
    )
    return desc.values


def compute_descriptors(images, cfg: PipelineConfig, zca, dico) -> np.ndarray:
    """Descriptor matrix, one row per image; order independent of threading."""
    workers = worker_count()
    if workers == 1 or len(images) == 1:
        rows = [image_descriptor(im, cfg, zca, dico) for im in images]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda im: image_descriptor(im, cfg, zca, dico), images))
    return np.vstack(rows)


def fit_feature_extractor(images, cfg: PipelineConfig):
    """Fit the ZCA transform and dictionary on a bounded pool of patches."""
    all_patches = np.vstack(
        [patches.extract_patches(im.pixels, cfg.r, cfg.s).vectors for im in images]
    )
    sample = whitening.subsample_rows(all_patches, MAX_FIT_PATCHES, cfg.seed)
    zca = whitening.fit_zca(sample, cfg.eps_zca)
    dico = None
    if cfg.encoding_mode == "encode":
        white = whitening.apply_zca(zca, sample)
        dico = dict_mod.train_kmeans(
            white, cfg.K, seed=cfg.seed, normalize_atoms=cfg.normalize_atoms
        )
    return zca, dico


def fit_pipeline(train_images, cfg: PipelineConfig,
                 feature_extractor=None) -> Model:
    """Run every training stage in order and assemble a Model.

    ``feature_extractor`` may carry a pre-fit (zca, dictionary) pair to share
    one dictionary across splits.
    """
    subjects = {im.subject_id for im in train_images}
    if len(subjects) < 2:
        raise ValueError("training set must contain at least 2 subjects")
    timings = {}

    def staged(name, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except Exception as exc:
            raise RuntimeError(f"pipeline stage {name!r} failed: {exc}") from exc
        timings[name] = time.perf_counter() - t0
        return out

    if feature_extractor is None:
        zca, dico = staged("feature_extractor", lambda: fit_feature_extractor(train_images, cfg))
    else:
        zca, dico = feature_extractor
    x = staged("descriptors", lambda: compute_descriptors(train_images, cfg, zca, dico))
    labels = [im.subject_id for im in train_images]
    ridge = staged("ridge", lambda: classifier.train_ridge(x, labels, cfg.lam))
    return Model(cfg=cfg, zca=zca, dictionary=dico, ridge=ridge, timings=timings)


def evaluate(model: Model, test_images) -> tuple[float, dict]:
    """Accuracy fraction and sparse confusion counts over a probe set."""
    if not test_images:
        raise ValueError("empty test set")
    x = compute_descriptors(test_images, model.cfg, model.zca, model.dictionary)
    preds = classifier.predict(model.ridge, x)
    confusion: dict[str, int] = {}
    correct = 0
    for im, pred in zip(test_images, preds):
        if pred == im.subject_id:
            correct += 1
        key = f"{im.subject_id}|{pred}"
        confusion[key] = confusion.get(key, 0) + 1
    return correct / len(test_images), dict(sorted(confusion.items()))


@dataclass
class BenchmarkReport:
    per_run_accuracies: list
    mean: float
    std: float  # population std over runs
    config: dict
    per_run_confusions: list
    excluded: list
    timings: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> str:
        # timings are excluded: report bytes must be a pure function of
        # (corpus, config, seed), independent of machine load and threading
        doc = {
            "per_run_accuracies": self.per_run_accuracies,
            "mean": self.mean,
            "std": self.std,
            "config": self.config,
            "per_run_confusions": self.per_run_confusions,
            "excluded_subjects": self.excluded,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [
            "benchmark report",
            f"  runs: {len(self.per_run_accuracies)}",
            f"  accuracy: {100 * self.mean:.1f} +/- {100 * self.std:.1f} %",
            "  per-run: " + ", ".join(f"{100 * a:.1f}" for a in self.per_run_accuracies),
        ]
        if self.excluded:
            lines.append(f"  excluded subjects: {', '.join(self.excluded)}")
        if self.timings:
            lines.append("  wall clock (s): " + ", ".join(
                f"{k}={v:.2f}" for k, v in self.timings.items()
            ))
        return "\n".join(lines) + "\n"


def benchmark(images, cfg: PipelineConfig, splits: list[Split] | None = None) -> BenchmarkReport:
    """Fit and evaluate once per random split; aggregate mean and std."""
    t_start = time.perf_counter()
    timings = {"split": 0.0, "fit": 0.0, "evaluate": 0.0}
    excluded = excluded_subjects(images, cfg.split_spec)
    if splits is None:
        t0 = time.perf_counter()
        splits = make_splits(images, cfg.split_spec)
        timings["split"] = time.perf_counter() - t0

    shared = None
    if cfg.shared_dictionary:
        t0 = time.perf_counter()
        shared = fit_feature_extractor(images, cfg)
        timings["fit"] += time.perf_counter() - t0

    accs, confusions = [], []
    for split in splits:
        t0 = time.perf_counter()
        model = fit_pipeline(split.train, cfg, feature_extractor=shared)
        timings["fit"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        acc, conf = evaluate(model, split.test)
        timings["evaluate"] += time.perf_counter() - t0
        accs.append(acc)
        confusions.append(conf)

    timings["total"] = time.perf_counter() - t_start
    return BenchmarkReport(
        per_run_accuracies=accs,
        mean=float(np.mean(accs)),
        std=float(np.std(accs)),  # population std
        config=cfg.as_dict(),
        per_run_confusions=confusions,
        excluded=excluded,
        timings=timings,
    )


def ablate_encoding(images, cfg: PipelineConfig) -> dict:
    """Benchmark with and without encoding on identical splits."""
    splits = make_splits(images, cfg.split_spec)
    with_enc = benchmark(images, replace(cfg, encoding_mode="encode"), splits=splits)
    without = benchmark(images, replace(cfg, encoding_mode="passthrough"), splits=splits)
    # both reports must have seen the same splits
    assert with_enc.config["seed"] == without.config["seed"]
    return {"with_encoding": with_enc, "without_encoding": without, "shared_splits": True}


def ablate_grid(images, cfg: PipelineConfig, dict_sizes, pyramid_depths,
                full_pyramid=(1, 2, 4, 6, 8, 10, 12, 15)) -> str:
    """Dictionary-size x pyramid-depth cross evaluation, emitted as CSV.

    Rows are pyramid depths (prefixes of ``full_pyramid``), columns are
    dictionary sizes; each cell is "mean +/- std" accuracy in percent.
    """
    splits = make_splits(images, cfg.split_spec)
    lines = ["pyramid_levels," + ",".join(str(k) for k in dict_sizes)]
    for depth in pyramid_depths:
        if depth > len(full_pyramid):
            raise ValueError(f"pyramid depth {depth} exceeds {len(full_pyramid)} levels")
        row = [str(depth)]
        for k in dict_sizes:
            sub = replace(cfg, K=k, grids=full_pyramid[:depth])
            rep = benchmark(images, sub, splits=splits)
            row.append(f"{100 * rep.mean:.1f} +/- {100 * rep.std:.1f}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"

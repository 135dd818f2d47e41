"""Corpus ingestion and reproducible train/test splits.

A corpus is a directory with one subdirectory per subject; each subdirectory
holds 8-bit binary PGM (P5) or 8-bit PNG images.  Images are decoded to
grayscale, resized to a square target side with corner-anchored bilinear
interpolation, and scaled to [0, 1].
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

log = logging.getLogger(__name__)

# BT.601 luma weights for RGB -> grayscale
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class GrayImage:
    """A decoded grayscale image with its subject label."""

    pixels: np.ndarray  # (side, side) float64 in [0, 1]
    subject_id: str
    source_path: str

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 2:
            raise ValueError("pixels must be a 2-D array")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixels must lie in [0, 1]")
        px.setflags(write=False)

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class SplitSpec:
    """Random N-train / M-test per-subject split protocol."""

    train_per_subject: int
    test_per_subject: int
    runs: int
    seed: int

    def __post_init__(self):
        if self.train_per_subject < 1 or self.test_per_subject < 1:
            raise ValueError("per-subject counts must be positive")
        if self.runs < 1:
            raise ValueError("runs must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def min_per_subject(self) -> int:
        return self.train_per_subject + self.test_per_subject


@dataclass
class Split:
    """One train/test partition of a corpus."""

    run: int
    train: list[GrayImage] = field(default_factory=list)
    test: list[GrayImage] = field(default_factory=list)


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM with maxval 255 into a float array in [0, 1]."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5)")
    # header tokens: magic, width, height, maxval; '#' comments run to EOL
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported, got {maxval}")
    n = width * height
    raster = np.frombuffer(data, dtype=np.uint8, count=n, offset=pos)
    if raster.size < n:
        raise ValueError(f"{path}: truncated PGM raster")
    return raster.reshape(height, width).astype(np.float64) / 255.0


def write_pgm(path, pixels: np.ndarray) -> None:
    """Write a [0, 1] float array as a binary (P5) PGM with maxval 255."""
    arr = np.clip(np.rint(np.asarray(pixels) * 255.0), 0, 255).astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(arr.tobytes())


def read_png(path) -> np.ndarray:
    """Read an 8-bit PNG; RGB inputs reduced via BT.601 luma weights."""
    with Image.open(path) as img:
        if img.mode in ("RGB", "RGBA", "P"):
            arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
            return arr @ _LUMA
        if img.mode in ("L", "LA"):
            return np.asarray(img.convert("L"), dtype=np.float64) / 255.0
        raise ValueError(f"{path}: unsupported PNG mode {img.mode}")


def bilinear_resize(pixels: np.ndarray, out_rows: int, out_cols: int | None = None) -> np.ndarray:
    """Corner-anchored bilinear resize.

    Pixel centers sit at integer coordinates; the sampling scale is
    (src - 1) / (dst - 1) for dst > 1, so the four corners of the output
    reproduce the input corners exactly.  A same-size resize returns a
    bit-identical copy.
    """
    if out_cols is None:
        out_cols = out_rows
    in_rows, in_cols = pixels.shape
    if (in_rows, in_cols) == (out_rows, out_cols):
        return pixels.copy()

    def coords(n_in, n_out):
        if n_out == 1:
            return np.zeros(1)
        return np.arange(n_out) * ((n_in - 1) / (n_out - 1))

    ys = coords(in_rows, out_rows)
    xs = coords(in_cols, out_cols)
    y0 = np.minimum(np.floor(ys).astype(int), in_rows - 1)
    x0 = np.minimum(np.floor(xs).astype(int), in_cols - 1)
    y1 = np.minimum(y0 + 1, in_rows - 1)
    x1 = np.minimum(x0 + 1, in_cols - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = pixels[np.ix_(y0, x0)] * (1 - wx) + pixels[np.ix_(y0, x1)] * wx
    bot = pixels[np.ix_(y1, x0)] * (1 - wx) + pixels[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


_EXTENSIONS = {".pgm", ".png"}


def _decode(path: Path) -> np.ndarray:
    ext = path.suffix.lower()
    if ext == ".pgm":
        return read_pgm(path)
    if ext == ".png":
        return read_png(path)
    raise ValueError(f"{path}: unsupported format")


def load_corpus(root, target_side: int, errors: list | None = None) -> list[GrayImage]:
    """Load every subject/image under ``root`` at the given square side.

    Unreadable files are skipped; each failure is logged and, when ``errors``
    is given, appended to it as ``(path, message)``.  An empty result raises.
    Output is sorted by (subject_id, filename) regardless of scan order.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root {root} is not a directory")
    images = []
    for subj_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for f in sorted(p for p in subj_dir.iterdir() if p.suffix.lower() in _EXTENSIONS):
            try:
                px = _decode(f)
                px = bilinear_resize(px, target_side, target_side)
                images.append(GrayImage(np.clip(px, 0.0, 1.0), subj_dir.name, str(f)))
            except Exception as exc:  # noqa: BLE001 - per-file errors must not kill the load
                log.warning("skipping %s: %s", f, exc)
                if errors is not None:
                    errors.append((str(f), str(exc)))
    if not images:
        raise ValueError(f"corpus at {root} contains no readable images")
    images.sort(key=lambda im: (im.subject_id, im.source_path))
    return images


def group_by_subject(images: list[GrayImage]) -> dict[str, list[GrayImage]]:
    by_subject: dict[str, list[GrayImage]] = {}
    for im in images:
        by_subject.setdefault(im.subject_id, []).append(im)
    return by_subject


def excluded_subjects(images: list[GrayImage], spec: SplitSpec) -> list[str]:
    """Subjects with too few images to satisfy the split spec."""
    return sorted(
        s for s, ims in group_by_subject(images).items() if len(ims) < spec.min_per_subject
    )


def _subject_rng(seed: int, run: int, subject_id: str) -> np.random.Generator:
    # Counter-based generator keyed on (seed, run, subject): the Philox key is
    # derived from a hash of the triple, so draws are machine-independent.
    digest = hashlib.sha256(f"{seed}|{run}|{subject_id}".encode()).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def make_splits(images: list[GrayImage], spec: SplitSpec) -> list[Split]:
    """Draw ``spec.runs`` independent train/test splits.

    For each retained subject and run, exactly ``train_per_subject`` images go
    to train and ``test_per_subject`` of the remainder to test, drawn without
    replacement by a deterministic per-(seed, run, subject) generator.
    """
    by_subject = group_by_subject(images)
    dropped = excluded_subjects(images, spec)
    for s in dropped:
        log.warning(
            "excluding subject %s: %d images < %d required",
            s, len(by_subject[s]), spec.min_per_subject,
        )
        del by_subject[s]
    if not by_subject:
        raise ValueError("no subject has enough images for the requested split")

    splits = []
    for run in range(spec.runs):
        split = Split(run=run)
        for subject in sorted(by_subject):
            ims = by_subject[subject]
            order = _subject_rng(spec.seed, run, subject).permutation(len(ims))
            n_tr, n_te = spec.train_per_subject, spec.test_per_subject
            split.train.extend(ims[i] for i in order[:n_tr])
            split.test.extend(ims[i] for i in order[n_tr : n_tr + n_te])
        splits.append(split)
    return splits


def write_split_manifest(splits: list[Split], path) -> None:
    """Plain-text manifest: one `run,role,subject,path` line per image."""
    lines = []
    for split in splits:
        for role, ims in (("train", split.train), ("test", split.test)):
            for im in ims:
                lines.append(f"{split.run},{role},{im.subject_id},{im.source_path}")
    Path(path).write_text("\n".join(lines) + "\n")

"""Binary model file format.

Layout: magic ``SOPM``, version u32, then length-prefixed little-endian
sections in fixed order: config (UTF-8 key=value lines), ZCA mean, ZCA
matrix, dictionary atoms, ridge weights, class table.  All lengths are
64-bit, all reals 64-bit.
"""

from __future__ import annotations

import struct

import numpy as np

MODEL_MAGIC = b"SOPM"
MODEL_VERSION = 1


def _pack_array(arr: np.ndarray) -> bytes:
    a = np.atleast_2d(np.asarray(arr, dtype=np.float64))
    rows, cols = a.shape
    return struct.pack("<QQ", rows, cols) + a.astype("<f8").tobytes()


def _unpack_array(payload: bytes) -> np.ndarray:
    rows, cols = struct.unpack_from("<QQ", payload)
    a = np.frombuffer(payload, dtype="<f8", offset=16, count=rows * cols)
    return a.reshape(rows, cols).astype(np.float64)


def _pack_strings(items) -> bytes:
    out = [struct.pack("<Q", len(items))]
    for s in items:
        b = s.encode()
        out.append(struct.pack("<Q", len(b)) + b)
    return b"".join(out)


def _unpack_strings(payload: bytes) -> list[str]:
    (count,) = struct.unpack_from("<Q", payload)
    pos = 8
    items = []
    for _ in range(count):
        (n,) = struct.unpack_from("<Q", payload, pos)
        pos += 8
        items.append(payload[pos : pos + n].decode())
        pos += n
    return items


def write_model(path, config_text: str, zca_mean, zca_matrix, atoms,
                ridge_weights, classes) -> None:
    sections = [
        config_text.encode(),
        _pack_array(zca_mean),
        _pack_array(zca_matrix),
        _pack_array(atoms),
        _pack_array(ridge_weights),
        _pack_strings(list(classes)),
    ]
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_VERSION))
        for payload in sections:
            fh.write(struct.pack("<Q", len(payload)))
            fh.write(payload)


def read_model(path):
    """Returns (config_text, zca_mean, zca_matrix, atoms, ridge_weights, classes)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MODEL_MAGIC:
            raise ValueError(f"{path}: bad model magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        sections = []
        for _ in range(6):
            (n,) = struct.unpack("<Q", fh.read(8))
            payload = fh.read(n)
            if len(payload) != n:
                raise ValueError(f"{path}: truncated model file")
            sections.append(payload)
    config_text = sections[0].decode()
    zca_mean = _unpack_array(sections[1])[0]
    zca_matrix = _unpack_array(sections[2])
    atoms = _unpack_array(sections[3])
    weights = _unpack_array(sections[4])
    classes = _unpack_strings(sections[5])
    return config_text, zca_mean, zca_matrix, atoms, weights, classes

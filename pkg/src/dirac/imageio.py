"""Minimal PGM (P2/P5) reading and writing for eyeballing tensors.

P2 (ASCII) is used for golden files, P5 (binary) for bulk output.  Writes
go through a temp file and an atomic rename.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InvalidArgumentError
from .tensors import FeatureMap


def render_u8(img: np.ndarray) -> np.ndarray:
    """Min-max scale a 2D array into 0..255."""
    lo, hi = float(img.min()), float(img.max())
    if hi <= lo:
        return np.zeros(img.shape, dtype=np.uint8)
    return np.round((img - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def write_pgm(path, img: np.ndarray, binary: bool = True) -> None:
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidArgumentError(f"PGM output must be 2D, got shape {img.shape}")
    if img.dtype != np.uint8:
        img = render_u8(img.astype(np.float64))
    h, w = img.shape
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(img.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in img:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())
    os.replace(tmp, path)


def _tokens(blob: bytes):
    """Header tokens, skipping comments, tracking the byte offset."""
    i = 0
    while True:
        while i < len(blob) and blob[i : i + 1].isspace():
            i += 1
        if i < len(blob) and blob[i : i + 1] == b"#":
            while i < len(blob) and blob[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(blob) and not blob[i : i + 1].isspace():
            i += 1
        yield blob[start:i], i


def read_pgm(path) -> FeatureMap:
    """Read a P2 or P5 grayscale image as a (1, H, W) feature map."""
    with open(path, "rb") as fh:
        blob = fh.read()
    toks = _tokens(blob)
    try:
        magic, _ = next(toks)
        if magic not in (b"P2", b"P5"):
            raise InvalidArgumentError(f"{path}: not a PGM file (magic {magic!r})")
        (w_tok, _), (h_tok, _), (maxv_tok, end) = next(toks), next(toks), next(toks)
        w, h, maxv = int(w_tok), int(h_tok), int(maxv_tok)
    except (StopIteration, ValueError) as exc:
        raise InvalidArgumentError(f"{path}: malformed PGM header") from exc
    if maxv < 1 or maxv > 255:
        raise InvalidArgumentError(f"{path}: unsupported maxval {maxv}")
    if magic == b"P5":
        data = np.frombuffer(blob, dtype=np.uint8, count=h * w, offset=end + 1)
    else:
        vals = blob[end:].split()
        if len(vals) < h * w:
            raise InvalidArgumentError(f"{path}: truncated P2 payload")
        data = np.array([int(v) for v in vals[: h * w]], dtype=np.uint8)
    return FeatureMap(data.reshape(1, h, w).astype(np.float64))

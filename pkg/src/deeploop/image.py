"""Grayscale images, binary PGM (P5) I/O and bilinear resizing."""
from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    PgmHeaderError,
    PgmMaxvalError,
    PgmMissingFileError,
    PgmTruncatedError,
    ShapeError,
)

CANONICAL_WIDTH = 160
CANONICAL_HEIGHT = 120

_HEADER = re.compile(rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image; ``data`` is a (height, width) uint8 array."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            raise ShapeError(f"image data must be uint8, got {data.dtype}")
        if data.size != self.width * self.height:
            raise ShapeError(f"data length {data.size} != {self.width}x{self.height}")
        object.__setattr__(self, "data", np.ascontiguousarray(data.reshape(self.height, self.width)))

    @classmethod
    def from_array(cls, arr) -> GrayImage:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ShapeError(f"expected a 2-D array, got shape {arr.shape}")
        return cls(arr.shape[1], arr.shape[0], arr.astype(np.uint8, copy=False))

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.width == other.width and self.height == other.height and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"

    def as_float(self) -> np.ndarray:
        """Intensities scaled to [0, 1] as float64."""
        return self.data / 255.0


def load_pgm(path) -> GrayImage:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError as exc:
        raise PgmMissingFileError(f"{path}: no such file") from exc
    m = _HEADER.match(raw)
    if m is None:
        raise PgmHeaderError(f"{path}: not a binary PGM (P5) header")
    width, height, maxval = (int(g) for g in m.groups())
    if width < 1 or height < 1:
        raise PgmHeaderError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise PgmMaxvalError(f"{path}: maxval {maxval} unsupported (need 255)")
    payload = raw[m.end():]
    need = width * height
    if len(payload) < need:
        raise PgmTruncatedError(f"{path}: payload has {len(payload)} bytes, header needs {need}")
    data = np.frombuffer(payload, dtype=np.uint8, count=need).reshape(height, width)
    return GrayImage(width, height, data.copy())


def save_pgm(img: GrayImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.width, img.height))
        fh.write(img.data.tobytes())


def list_pgm(directory) -> list[str]:
    """Sorted paths of ``*.pgm`` files in ``directory``."""
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith(".pgm"))
    return [os.path.join(directory, n) for n in names]


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resize with half-pixel centers and clamped borders."""
    if out_w < 1 or out_h < 1:
        raise ShapeError(f"output dimensions must be positive, got {out_w}x{out_h}")
    return GrayImage(out_w, out_h, kernels.resize_bilinear(img.data, out_h, out_w))


def to_canonical(img: GrayImage) -> GrayImage:
    return resize_bilinear(img, CANONICAL_WIDTH, CANONICAL_HEIGHT)


def scale_intensity(img: GrayImage, gain: float) -> GrayImage:
    """Multiply intensities by ``gain``, rounding half up and clipping to 255."""
    out = np.clip(np.floor(img.data * float(gain) + 0.5), 0, 255).astype(np.uint8)
    return GrayImage(img.width, img.height, out)

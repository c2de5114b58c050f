"""Histogram of oriented gradients with configurable cells, blocks and stride."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeError
from .image import GrayImage


@dataclass(frozen=True)
class HogParams:
    cell_size: int = 8
    block_cells: int = 2
    block_stride: int = 16
    bins: int = 9
    epsilon: float = 1e-6

    def __post_init__(self):
        if min(self.cell_size, self.block_cells, self.block_stride, self.bins) < 1:
            raise ShapeError(f"HOG parameters must be positive: {self}")
        if not self.epsilon > 0:
            raise ShapeError("HOG epsilon must be positive")

    @property
    def block_pixels(self) -> int:
        return self.cell_size * self.block_cells

    @property
    def block_length(self) -> int:
        return self.bins * self.block_cells ** 2

    def block_grid(self, width: int, height: int) -> tuple[int, int]:
        """Number of blocks (Bx, By) for an image of the given size."""
        bp = self.block_pixels
        if bp > min(width, height):
            raise ShapeError(f"block of {bp}px does not fit a {width}x{height} image")
        return (width - bp) // self.block_stride + 1, (height - bp) // self.block_stride + 1

    def length(self, width: int = 160, height: int = 120) -> int:
        bx, by = self.block_grid(width, height)
        return self.block_length * bx * by


def _as_unit_intensity(img) -> np.ndarray:
    if isinstance(img, GrayImage):
        return img.as_float()
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {arr.shape}")
    return arr


def hog_descriptor(img, params: HogParams = HogParams()) -> np.ndarray:
    """HOG vector of length ``params.length(W, H)`` (float64, entries in [0, 1]).

    ``img`` is a :class:`GrayImage` or a 2-D float array already scaled to
    [0, 1].  Ordering: blocks row-major, cells row-major within a block,
    bins within a cell.
    """
    f = _as_unit_intensity(img)
    h, w = f.shape
    bx, by = params.block_grid(w, h)
    cs, nc, st = params.cell_size, params.block_cells, params.block_stride
    votes = kernels.hog_votes(f, params.bins)

    xs = sorted({i * st + j * cs for i in range(bx) for j in range(nc)})
    ys = sorted({i * st + j * cs for i in range(by) for j in range(nc)})
    col_sums = np.stack([votes[:, x:x + cs].sum(axis=1) for x in xs], axis=1)  # (H, nx, bins)
    cells = np.stack([col_sums[y:y + cs].sum(axis=0) for y in ys], axis=0)  # (ny, nx, bins)
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}

    out = np.empty((by, bx, params.block_length))
    eps2 = params.epsilon ** 2
    for r in range(by):
        rows = [yi[r * st + j * cs] for j in range(nc)]
        for c in range(bx):
            cols = [xi[c * st + j * cs] for j in range(nc)]
            v = cells[np.ix_(rows, cols)].reshape(-1)
            out[r, c] = v / np.sqrt(v @ v + eps2)
    return out.reshape(-1)


def block_norms(desc: np.ndarray, params: HogParams) -> np.ndarray:
    return np.linalg.norm(np.asarray(desc).reshape(-1, params.block_length), axis=1)

"""Training-pair generation and the ``CLCD`` dataset container.

Each record pairs a raw 160x120 image with the HOG descriptor of its
projectively warped counterpart (or the other way round, decided by a fair
coin).  Layout, all little-endian::

    b"CLCD" | u32 version | u32 M | u32 H | u32 W | u32 D | u64 seed
    M x ( H*W uint8 image | D float32 target )
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    DataError,
    DegeneratePointsError,
    TruncatedContainerError,
    UnsupportedVersionError,
)
from .geometry import Homography, corner_quad, homography_from_four_points, random_four_points, warp_image
from .hog import HogParams, hog_descriptor
from .image import CANONICAL_HEIGHT, CANONICAL_WIDTH, GrayImage, list_pgm, load_pgm, to_canonical

MAGIC = b"CLCD"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIIQ")
HEADER_SIZE = _HEADER.size
_MAX_RETRIES = 8


@dataclass(frozen=True)
class DatasetHeader:
    count: int
    height: int
    width: int
    dim: int
    seed: int
    version: int = VERSION

    def record_size(self) -> int:
        return self.height * self.width + 4 * self.dim

    def file_size(self) -> int:
        return HEADER_SIZE + self.count * self.record_size()


@dataclass(frozen=True)
class TrainingPair:
    """Everything produced for one record; ``raw``/``target`` are what gets stored."""

    raw: GrayImage
    other: GrayImage
    target: np.ndarray
    source: GrayImage
    warped: GrayImage
    homography: Homography
    swapped: bool


def generate_pair(img: GrayImage, rng: np.random.Generator, hog: HogParams = HogParams(),
                  *, swap: bool | None = None, homography: Homography | None = None) -> TrainingPair:
    """Full record generation; ``swap`` and ``homography`` override the random draws."""
    if (img.width, img.height) != (CANONICAL_WIDTH, CANONICAL_HEIGHT):
        raise DataError(f"training images must be {CANONICAL_WIDTH}x{CANONICAL_HEIGHT}, got {img.width}x{img.height}")
    corners = corner_quad(img.width, img.height)
    h = homography
    for _ in range(_MAX_RETRIES):
        if h is not None:
            break
        quad = random_four_points(img.width, img.height, rng)
        try:
            h = homography_from_four_points(quad, corners)
        except DegeneratePointsError:
            continue
    if h is None:
        raise DegeneratePointsError(f"no usable quad after {_MAX_RETRIES} draws")
    warped = warp_image(img, h)
    coin = bool(rng.integers(2))
    swapped = coin if swap is None else swap
    raw, other = (warped, img) if swapped else (img, warped)
    return TrainingPair(raw, other, hog_descriptor(other, hog), img, warped, h, swapped)


def build_training_pair(img: GrayImage, rng: np.random.Generator, hog: HogParams = HogParams(),
                        **overrides) -> tuple[GrayImage, np.ndarray]:
    pair = generate_pair(img, rng, hog, **overrides)
    return pair.raw, pair.target


def record_rng(seed: int, index: int) -> np.random.Generator:
    """Per-record generator, independent of generation order."""
    return np.random.default_rng((seed ^ index) & 0xFFFFFFFFFFFFFFFF)


def _make_record(sources, seed, index, hog):
    rng = record_rng(seed, index)
    src = sources[int(rng.integers(len(sources)))]
    try:
        raw, target = build_training_pair(src, rng, hog)
    except Exception as exc:
        raise DataError(f"record {index}: {exc}") from exc
    return raw.data.tobytes() + target.astype("<f4").tobytes()


def build_dataset_from_images(images, count: int, seed: int, out, hog: HogParams = HogParams(),
                              workers: int = 1) -> DatasetHeader:
    sources = [to_canonical(im) for im in images]
    if not sources:
        raise DataError("no source images")
    if count < 1:
        raise DataError("record count must be at least 1")
    dim = hog.length(CANONICAL_WIDTH, CANONICAL_HEIGHT)
    header = DatasetHeader(count, CANONICAL_HEIGHT, CANONICAL_WIDTH, dim, seed)

    def make(i):
        return _make_record(sources, seed, i, hog)

    with open(out, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, count, header.height, header.width, dim, seed))
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                for rec in pool.map(make, range(count)):
                    fh.write(rec)
        else:
            for i in range(count):
                fh.write(make(i))
    return header


def build_dataset(image_dir, count: int | None, seed: int, hog: HogParams, out, workers: int = 1) -> DatasetHeader:
    """Write ``count`` records drawn (with replacement) from the PGMs in ``image_dir``.

    ``count=None`` means one record per source image.
    """
    paths = list_pgm(image_dir)
    if not paths:
        raise DataError(f"{image_dir}: no .pgm images")
    images = [load_pgm(p) for p in paths]
    return build_dataset_from_images(images, len(images) if count is None else count, seed, out, hog, workers)


class Dataset:
    """In-memory view of a ``CLCD`` file."""

    def __init__(self, header: DatasetHeader, images: np.ndarray, targets: np.ndarray):
        self.header = header
        self.images = images
        self.targets = targets

    def __len__(self):
        return self.header.count

    @property
    def dim(self) -> int:
        return self.header.dim

    def batch(self, indices) -> tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(indices, dtype=np.intp)
        x1 = self.images[idx].astype(np.float32) / np.float32(255.0)
        return x1, self.targets[idx].astype(np.float32)


def read_header(buf: bytes) -> DatasetHeader:
    if len(buf) < HEADER_SIZE:
        raise TruncatedContainerError("dataset header truncated")
    magic, version, m, h, w, d, seed = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagicError(f"bad dataset magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported dataset version {version}")
    if m < 1 or h * w <= 0 or d < 1:
        raise DataError(f"invalid dataset header M={m} H={h} W={w} D={d}")
    return DatasetHeader(m, h, w, d, seed, version)


def read_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        buf = fh.read()
    header = read_header(buf)
    if len(buf) < header.file_size():
        raise TruncatedContainerError(f"{path}: {len(buf)} bytes, header implies {header.file_size()}")
    rec = np.dtype([("image", np.uint8, (header.height, header.width)), ("target", "<f4", (header.dim,))])
    arr = np.frombuffer(buf, dtype=rec, count=header.count, offset=HEADER_SIZE)
    return Dataset(header, np.ascontiguousarray(arr["image"]), np.ascontiguousarray(arr["target"]))


class BatchSampler:
    """Epoch-wise sampling without replacement; epoch order is a seeded permutation."""

    def __init__(self, dataset: Dataset, batch_size: int, rng: np.random.Generator):
        if not 1 <= batch_size:
            raise ValueError("batch size must be positive")
        self.dataset = dataset
        self.batch_size = min(batch_size, len(dataset))
        self.rng = rng
        self._order = np.empty(0, dtype=np.intp)
        self._pos = 0

    def epoch(self):
        """Yield (indices, X1, X2) for one full pass, last batch possibly short."""
        order = self.rng.permutation(len(self.dataset))
        for start in range(0, len(order), self.batch_size):
            idx = order[start:start + self.batch_size]
            yield (idx, *self.dataset.batch(idx))

    def next_batch(self) -> tuple[np.ndarray, np.ndarray]:
        """Next full batch, continuing across epoch boundaries."""
        if self._pos + self.batch_size > len(self._order):
            self._order = self.rng.permutation(len(self.dataset))
            self._pos = 0
        idx = self._order[self._pos:self._pos + self.batch_size]
        self._pos += self.batch_size
        return self.dataset.batch(idx)


def sample_batch(dataset: Dataset, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if not 1 <= n <= len(dataset):
        raise ValueError(f"batch size {n} outside [1, {len(dataset)}]")
    idx = rng.permutation(len(dataset))[:n]
    return dataset.batch(idx)

"""Flat descriptor store with exhaustive cosine search, and the ``CLCB`` file.

Vectors are kept unit-norm in one contiguous float32 block, so a query is a
single matrix-vector product over the live prefix.  Concurrent queries are
safe; inserts must be serialized by the caller.

``CLCB`` layout (little-endian): b"CLCB" | u32 version | u32 dim | u64 count,
then ``count`` entries of u64 id followed by ``dim`` float32 values.
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import (
    BadMagicError,
    DatabaseError,
    InvalidDescriptorError,
    ShapeError,
    TruncatedContainerError,
    UnsupportedVersionError,
)

MAGIC = b"CLCB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


class DescriptorDB:
    def __init__(self, dim: int = 1064, capacity: int = 1024):
        self.dim = dim
        self._vecs = np.empty((max(capacity, 1), dim), dtype=np.float32)
        self._ids = np.empty(max(capacity, 1), dtype=np.uint64)
        self._n = 0

    def __len__(self):
        return self._n

    @property
    def ids(self) -> np.ndarray:
        return self._ids[:self._n]

    @property
    def vectors(self) -> np.ndarray:
        return self._vecs[:self._n]

    def _grow(self, need):
        cap = len(self._ids)
        if need <= cap:
            return
        cap = max(need, 2 * cap)
        vecs = np.empty((cap, self.dim), dtype=np.float32)
        vecs[:self._n] = self._vecs[:self._n]
        ids = np.empty(cap, dtype=np.uint64)
        ids[:self._n] = self._ids[:self._n]
        self._vecs, self._ids = vecs, ids

    def _prepare(self, vec) -> np.ndarray:
        v = np.asarray(vec, dtype=np.float64).reshape(-1)
        if v.size != self.dim:
            raise ShapeError(f"descriptor has {v.size} values, database dim is {self.dim}")
        n = np.sqrt(v @ v)
        if not (np.isfinite(n) and n > 0):
            raise InvalidDescriptorError("descriptor is zero or non-finite")
        return v / n

    def insert(self, id_: int, vec) -> None:
        """Append ``vec`` (re-normalized to unit length) under ``id_``."""
        id_ = int(id_)
        if id_ < 0:
            raise DatabaseError(f"ids must be non-negative, got {id_}")
        if self._n and id_ <= int(self._ids[self._n - 1]):
            raise DatabaseError(f"id {id_} not greater than last id {int(self._ids[self._n - 1])}")
        v = self._prepare(vec)
        self._grow(self._n + 1)
        self._vecs[self._n] = v
        self._ids[self._n] = id_
        self._n += 1

    def _limit(self, exclude_above):
        if exclude_above is None:
            return self._n
        return int(np.searchsorted(self.ids, np.uint64(max(int(exclude_above), 0)), side="left"))

    def query(self, vec, k: int = 1, exclude_above: int | None = None) -> list[tuple[int, float]]:
        """Top-``k`` (id, cosine score) pairs, best first, ties to the lower id.

        The query is normalized like an inserted vector.  Entries with
        id >= ``exclude_above`` are not searched.
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        n = self._limit(exclude_above)
        if n == 0:
            raise DatabaseError("no candidates to search")
        q = np.asarray(vec, dtype=np.float32).reshape(-1)
        if q.size != self.dim:
            raise ShapeError(f"query has {q.size} values, database dim is {self.dim}")
        qn = float(np.sqrt(q @ q))
        if not (qn > 0 and qn < np.inf):
            raise InvalidDescriptorError("query is zero or non-finite")
        q = q / np.float32(qn)
        scores = self._vecs[:n] @ q
        if k == 1:
            i = int(np.argmax(scores))
            return [(int(self._ids[i]), float(scores[i]))]
        if k < n:
            part = np.argpartition(-scores, k - 1)[:k]
            cand = np.flatnonzero(scores >= scores[part].min())
        else:
            cand = np.arange(n)
        # index order is id order, so sorting by (-score, index) breaks ties by id
        order = cand[np.lexsort((cand, -scores[cand]))][:k]
        return [(int(self._ids[i]), float(scores[i])) for i in order]

    def candidate_count(self, exclude_above: int | None = None) -> int:
        return self._limit(exclude_above)

    def to_bytes(self) -> bytes:
        rec = np.empty(self._n, dtype=_record_dtype(self.dim))
        rec["id"] = self.ids
        rec["vec"] = self.vectors
        return _HEADER.pack(MAGIC, VERSION, self.dim, self._n) + rec.tobytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> DescriptorDB:
        if len(buf) < _HEADER.size:
            raise TruncatedContainerError("database header truncated")
        magic, version, dim, count = _HEADER.unpack_from(buf)
        if magic != MAGIC:
            raise BadMagicError(f"bad database magic {magic!r}")
        if version != VERSION:
            raise UnsupportedVersionError(f"unsupported database version {version}")
        rdt = _record_dtype(dim)
        payload = len(buf) - _HEADER.size
        if payload != count * rdt.itemsize:
            raise TruncatedContainerError(f"count {count} needs {count * rdt.itemsize} payload bytes, found {payload}")
        rec = np.frombuffer(buf, dtype=rdt, count=count, offset=_HEADER.size)
        if count > 1 and not np.all(np.diff(rec["id"].astype(np.int64)) > 0):
            raise DatabaseError("stored ids are not strictly increasing")
        db = cls(dim, capacity=count)
        db._vecs[:count] = rec["vec"]
        db._ids[:count] = rec["id"]
        db._n = count
        return db


def _record_dtype(dim):
    return np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])


def save_db(db: DescriptorDB, path) -> None:
    with open(path, "wb") as fh:
        fh.write(db.to_bytes())


def load_db(path) -> DescriptorDB:
    with open(path, "rb") as fh:
        return DescriptorDB.from_bytes(fh.read())

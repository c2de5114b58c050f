"""``CLCM`` model container.

Little-endian layout::

    b"CLCM" | u32 version | u32 n | n x u32 config values
    u32 layer count | per layer: u32 name length, name (utf-8), u32 rank,
                                 rank x u32 extents, float32 payload
"""
import struct

import numpy as np

from ..errors import (
    BadMagicError,
    ContainerError,
    ContainerFormatError,
    ShapeError,
    TruncatedContainerError,
    UnsupportedVersionError,
)
from .model import NetConfig

MAGIC = b"CLCM"
VERSION = 1


def model_bytes(params, config: NetConfig) -> bytes:
    cfg = config.to_ints()
    parts = [MAGIC, struct.pack("<II", VERSION, len(cfg)), struct.pack(f"<{len(cfg)}I", *cfg)]
    names = list(config.param_shapes())
    parts.append(struct.pack("<I", len(names)))
    for name in names:
        arr = np.ascontiguousarray(params[name], dtype="<f4")
        enc = name.encode()
        parts.append(struct.pack("<I", len(enc)) + enc)
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(arr.tobytes())
    return b"".join(parts)


def save_model(params, config: NetConfig, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model_bytes(params, config))


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise TruncatedContainerError(f"model file truncated at byte {self.pos}")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def u32s(self, count):
        return list(struct.unpack(f"<{count}I", self.take(4 * count)))


def parse_model(buf: bytes):
    r = _Reader(buf)
    magic = r.take(4)
    if magic != MAGIC:
        raise BadMagicError(f"bad model magic {magic!r}")
    version = r.u32()
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported model version {version}")
    n = r.u32()
    try:
        config = NetConfig.from_ints(r.u32s(n))
    except ShapeError as exc:
        raise ContainerFormatError(f"invalid model configuration: {exc}") from None
    count = r.u32()
    params = {}
    for _ in range(count):
        name = r.take(r.u32()).decode()
        rank = r.u32()
        shape = tuple(r.u32s(rank))
        size = int(np.prod(shape)) if shape else 1
        params[name] = np.frombuffer(r.take(4 * size), dtype="<f4").reshape(shape).astype(np.float32)
    expected = config.param_shapes()
    if set(params) != set(expected) or any(params[k].shape != s for k, s in expected.items()):
        raise ContainerError("model layers do not match the stored configuration")
    return params, config


def load_model(path):
    with open(path, "rb") as fh:
        return parse_model(fh.read())

"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``DEEPLOOP_PURE_PYTHON=1`` to force the numpy fallback.  ``BACKEND`` names
the implementation in use.
"""
import os

import numpy as np

from . import _fallback

_ext = None
if not os.environ.get("DEEPLOOP_PURE_PYTHON"):
    try:
        from . import _kernels as _ext
    except ImportError:
        _ext = None

BACKEND = "cython" if _ext is not None else "numpy"
_impl = _ext if _ext is not None else _fallback

__all__ = [
    "BACKEND",
    "im2col",
    "col2im",
    "maxpool2x2",
    "maxpool2x2_backward",
    "hog_votes",
    "resize_bilinear",
    "warp_bilinear",
    "get_backend",
]


def get_backend(name):
    """Return the kernel module called ``name`` ("cython" or "numpy")."""
    if name == "numpy":
        return _fallback
    if name == "cython":
        if _ext is None:
            raise ImportError("compiled kernels are not available")
        return _ext
    raise ValueError(f"unknown backend {name!r}")


def im2col(x, k, stride, pad):
    return _impl.im2col(np.ascontiguousarray(x), k, stride, pad)


def col2im(cols, shape, k, stride, pad):
    return _impl.col2im(np.ascontiguousarray(cols), tuple(shape), k, stride, pad)


def maxpool2x2(x):
    return _impl.maxpool2x2(np.ascontiguousarray(x))


def maxpool2x2_backward(dout, arg, h, w):
    return _impl.maxpool2x2_backward(np.ascontiguousarray(dout), np.ascontiguousarray(arg), h, w)


def hog_votes(img, bins):
    return _impl.hog_votes(np.ascontiguousarray(img, dtype=np.float64), bins)


def resize_bilinear(img, out_h, out_w):
    return _impl.resize_bilinear(np.ascontiguousarray(img, dtype=np.uint8), out_h, out_w)


def warp_bilinear(img, hinv):
    return _impl.warp_bilinear(
        np.ascontiguousarray(img, dtype=np.uint8), np.ascontiguousarray(hinv, dtype=np.float64)
    )

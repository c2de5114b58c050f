"""Layer primitives with explicit backward passes.

Arrays are batched NCHW (convolution, pooling) or N x features (fully
connected).  Every function is dtype-preserving so the same code runs in
float32 for training and float64 for gradient checks.
"""
import numpy as np

from .. import kernels
from ..errors import ShapeError


def conv_output_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def conv2d_single(x, w, b, stride, pad):
    """One image: (C, H, W) -> (O, Ho, Wo), plus the im2col matrix."""
    o, c, k, _ = w.shape
    if x.shape[0] != c:
        raise ShapeError(f"conv expects {c} input channels, got {x.shape[0]}")
    ho = conv_output_size(x.shape[1], k, stride, pad)
    wo = conv_output_size(x.shape[2], k, stride, pad)
    if ho < 1 or wo < 1:
        raise ShapeError(f"kernel {k} does not fit input {x.shape[1:]} with pad {pad}")
    cols = kernels.im2col(x, k, stride, pad)
    out = w.reshape(o, -1) @ cols
    out += b[:, None]
    return out.reshape(o, ho, wo), cols


def conv2d(x, w, b, stride=1, pad=0):
    """Batched convolution; items are processed one at a time so results
    do not depend on batch composition."""
    if pad < 0 or stride < 1:
        raise ShapeError("need pad >= 0 and stride >= 1")
    if x.ndim != 4 or w.ndim != 4 or b.shape != (w.shape[0],):
        raise ShapeError(f"incompatible conv shapes x{x.shape} w{w.shape} b{b.shape}")
    outs, cols = zip(*(conv2d_single(xi, w, b, stride, pad) for xi in x))
    cache = (x.shape, w, stride, pad, cols)
    return np.stack(outs), cache


def conv2d_backward(dout, cache, need_dx=True):
    x_shape, w, stride, pad, cols = cache
    o, c, k, _ = w.shape
    w2 = w.reshape(o, -1)
    dw = np.zeros_like(w2)
    db = np.zeros(o, dtype=w.dtype)
    dx = np.empty(x_shape, dtype=w.dtype) if need_dx else None
    for i, col in enumerate(cols):
        d2 = dout[i].reshape(o, -1)
        dw += d2 @ col.T
        db += d2.sum(axis=1)
        if need_dx:
            dx[i] = kernels.col2im(w2.T @ d2, x_shape[1:], k, stride, pad)
    return dx, dw.reshape(w.shape), db


def maxpool2x2(x):
    """2x2/stride-2 max pooling; odd trailing rows/cols are dropped.

    Returns the pooled tensor and a memo of winning offsets (0..3, row-major
    within the window; the first maximal element wins ties).
    """
    out, arg = kernels.maxpool2x2(x)
    return out, (x.shape, arg)


def maxpool2x2_backward(dout, memo):
    shape, arg = memo
    return kernels.maxpool2x2_backward(dout, arg, shape[2], shape[3])


def relu(x):
    return np.maximum(x, 0)


def relu_backward(dout, z):
    # subgradient 0 at z == 0
    return dout * (z > 0)


def sigmoid(x):
    with np.errstate(over="ignore"):
        return 1 / (1 + np.exp(-x))


def sigmoid_backward(dout, s):
    return dout * s * (1 - s)


def activation(kind, x):
    if kind == "relu":
        return relu(x)
    if kind == "sigmoid":
        return sigmoid(x)
    raise ValueError(f"unknown activation {kind!r}")


def fully_connected(x, w, b):
    """x: (N, in) or (in,); w: (out, in)."""
    if x.shape[-1] != w.shape[1] or b.shape != (w.shape[0],):
        raise ShapeError(f"fc shape mismatch x{x.shape} w{w.shape} b{b.shape}")
    return x @ w.T + b


def fully_connected_backward(dout, x, w):
    return dout @ w, dout.T @ x, dout.sum(axis=0)


def l2_loss(pred, target):
    """L = sum ||pred_i - target_i||^2 / (2N) and dL/dpred."""
    if pred.shape != target.shape:
        raise ShapeError(f"loss shape mismatch {pred.shape} vs {target.shape}")
    n = pred.shape[0] if pred.ndim > 1 else 1
    diff = pred - target
    return float((diff.astype(np.float64) ** 2).sum() / (2 * n)), diff / pred.dtype.type(n)

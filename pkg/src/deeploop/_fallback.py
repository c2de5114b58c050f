"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` mirrors them loop for
loop.  Coordinates follow the pixel-area convention: the image covers the
continuous rectangle [0, W] x [0, H] and pixel (u, v) has its center at
(u + 0.5, v + 0.5).
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col(x, k, stride, pad):
    """(C, H, W) -> (C*k*k, Ho*Wo), rows ordered (c, ky, kx)."""
    c, h, w = x.shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad))) if pad else x
    win = sliding_window_view(xp, (k, k), axis=(1, 2))
    win = win[:, : (ho - 1) * stride + 1 : stride, : (wo - 1) * stride + 1 : stride]
    return np.ascontiguousarray(win.transpose(0, 3, 4, 1, 2)).reshape(c * k * k, ho * wo)


def col2im(cols, shape, k, stride, pad):
    c, h, w = shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    cols = cols.reshape(c, k, k, ho, wo)
    xp = np.zeros((c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for ky in range(k):
        for kx in range(k):
            xp[:, ky : ky + stride * ho : stride, kx : kx + stride * wo : stride] += cols[:, ky, kx]
    return xp[:, pad : pad + h, pad : pad + w].copy()


def maxpool2x2(x):
    n, c, h, w = x.shape
    ho, wo = h // 2, w // 2
    win = x[:, :, : 2 * ho, : 2 * wo].reshape(n, c, ho, 2, wo, 2)
    win = win.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho, wo, 4)
    arg = win.argmax(axis=-1).astype(np.uint8)
    out = np.take_along_axis(win, arg[..., None].astype(np.intp), axis=-1)[..., 0]
    return np.ascontiguousarray(out), arg


def maxpool2x2_backward(dout, arg, h, w):
    n, c, ho, wo = dout.shape
    dwin = np.zeros((n, c, ho, wo, 4), dtype=dout.dtype)
    np.put_along_axis(dwin, arg[..., None].astype(np.intp), dout[..., None], axis=-1)
    dwin = dwin.reshape(n, c, ho, wo, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * ho, 2 * wo)
    dx = np.zeros((n, c, h, w), dtype=dout.dtype)
    dx[:, :, : 2 * ho, : 2 * wo] = dwin
    return dx


def hog_votes(img, bins):
    """Per-pixel orientation votes, shape (H, W, bins).

    ``img`` holds float64 intensities in [0, 1].  Gradients are central
    differences with replicated borders; each pixel splits its magnitude
    between the two bins whose centers bracket its unsigned orientation.
    """
    h, w = img.shape
    xi = np.arange(w)
    yi = np.arange(h)
    gx = img[:, np.minimum(xi + 1, w - 1)] - img[:, np.maximum(xi - 1, 0)]
    gy = img[np.minimum(yi + 1, h - 1), :] - img[np.maximum(yi - 1, 0), :]
    mag = np.sqrt(gx * gx + gy * gy)
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0
    theta[theta >= 180.0] = 0.0
    pos = theta / (180.0 / bins) - 0.5
    k0 = np.floor(pos)
    frac = pos - k0
    b0 = k0.astype(np.intp) % bins
    b1 = (b0 + 1) % bins
    votes = np.zeros((h, w, bins))
    rows, cols = np.indices((h, w))
    np.add.at(votes, (rows, cols, b0), (1.0 - frac) * mag)
    np.add.at(votes, (rows, cols, b1), frac * mag)
    return votes


def _bilinear(img, gx, gy):
    h, w = img.shape
    gx = np.clip(gx, 0.0, w - 1.0)
    gy = np.clip(gy, 0.0, h - 1.0)
    x0 = np.floor(gx).astype(np.intp)
    y0 = np.floor(gy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = gx - x0
    fy = gy - y0
    src = img.astype(np.float64)
    top = (1.0 - fx) * src[y0, x0] + fx * src[y0, x1]
    bot = (1.0 - fx) * src[y1, x0] + fx * src[y1, x1]
    val = (1.0 - fy) * top + fy * bot
    return np.clip(np.floor(val + 0.5), 0, 255).astype(np.uint8)


def resize_bilinear(img, out_h, out_w):
    h, w = img.shape
    u = np.arange(out_w, dtype=np.float64)
    v = np.arange(out_h, dtype=np.float64)
    gx = (u + 0.5) * w / out_w - 0.5
    gy = (v + 0.5) * h / out_h - 0.5
    gxx, gyy = np.meshgrid(gx, gy)
    return _bilinear(img, gxx, gyy)


def warp_bilinear(img, hinv):
    """Sample ``img`` at hinv * q for every output pixel center q; 0 outside."""
    h, w = img.shape
    qx, qy = np.meshgrid(np.arange(w, dtype=np.float64) + 0.5, np.arange(h, dtype=np.float64) + 0.5)
    px = hinv[0, 0] * qx + hinv[0, 1] * qy + hinv[0, 2]
    py = hinv[1, 0] * qx + hinv[1, 1] * qy + hinv[1, 2]
    pw = hinv[2, 0] * qx + hinv[2, 1] * qy + hinv[2, 2]
    ok = np.abs(pw) >= 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = np.where(ok, px / np.where(ok, pw, 1.0), -1.0)
        sy = np.where(ok, py / np.where(ok, pw, 1.0), -1.0)
    inside = ok & (sx >= 0.0) & (sx <= w) & (sy >= 0.0) & (sy <= h)
    out = _bilinear(img, sx - 0.5, sy - 0.5)
    out[~inside] = 0
    return out

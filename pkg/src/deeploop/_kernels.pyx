# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_fallback.py`` (same signatures)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, atan2, floor, fabs, fmod, M_PI

cnp.import_array()

ctypedef fused real:
    float
    double


def im2col(real[:, :, ::1] x, int k, int stride, int pad):
    cdef Py_ssize_t c = x.shape[0], h = x.shape[1], w = x.shape[2]
    cdef Py_ssize_t ho = (h + 2 * pad - k) // stride + 1
    cdef Py_ssize_t wo = (w + 2 * pad - k) // stride + 1
    dtype = np.float32 if real is float else np.float64
    out = np.zeros((c * k * k, ho * wo), dtype=dtype)
    cdef real[:, ::1] o = out
    cdef Py_ssize_t ci, ky, kx, oy, ox, iy, ix, row
    for ci in range(c):
        for ky in range(k):
            for kx in range(k):
                row = (ci * k + ky) * k + kx
                for oy in range(ho):
                    iy = oy * stride - pad + ky
                    if iy < 0 or iy >= h:
                        continue
                    for ox in range(wo):
                        ix = ox * stride - pad + kx
                        if ix >= 0 and ix < w:
                            o[row, oy * wo + ox] = x[ci, iy, ix]
    return out


def col2im(real[:, ::1] cols, shape, int k, int stride, int pad):
    cdef Py_ssize_t c = shape[0], h = shape[1], w = shape[2]
    cdef Py_ssize_t ho = (h + 2 * pad - k) // stride + 1
    cdef Py_ssize_t wo = (w + 2 * pad - k) // stride + 1
    dtype = np.float32 if real is float else np.float64
    out = np.zeros((c, h, w), dtype=dtype)
    cdef real[:, :, ::1] o = out
    cdef Py_ssize_t ci, ky, kx, oy, ox, iy, ix, row
    for ci in range(c):
        for ky in range(k):
            for kx in range(k):
                row = (ci * k + ky) * k + kx
                for oy in range(ho):
                    iy = oy * stride - pad + ky
                    if iy < 0 or iy >= h:
                        continue
                    for ox in range(wo):
                        ix = ox * stride - pad + kx
                        if ix >= 0 and ix < w:
                            o[ci, iy, ix] += cols[row, oy * wo + ox]
    return out


def maxpool2x2(real[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1]
    cdef Py_ssize_t ho = x.shape[2] // 2, wo = x.shape[3] // 2
    dtype = np.float32 if real is float else np.float64
    out = np.empty((n, c, ho, wo), dtype=dtype)
    arg = np.empty((n, c, ho, wo), dtype=np.uint8)
    cdef real[:, :, :, ::1] o = out
    cdef cnp.uint8_t[:, :, :, ::1] a = arg
    cdef Py_ssize_t i, ci, oy, ox, j
    cdef real best, v
    cdef int bi
    for i in range(n):
        for ci in range(c):
            for oy in range(ho):
                for ox in range(wo):
                    best = x[i, ci, 2 * oy, 2 * ox]
                    bi = 0
                    for j in range(1, 4):
                        v = x[i, ci, 2 * oy + j // 2, 2 * ox + j % 2]
                        if v > best:
                            best = v
                            bi = j
                    o[i, ci, oy, ox] = best
                    a[i, ci, oy, ox] = bi
    return out, arg


def maxpool2x2_backward(real[:, :, :, ::1] dout, cnp.uint8_t[:, :, :, ::1] arg, int h, int w):
    cdef Py_ssize_t n = dout.shape[0], c = dout.shape[1], ho = dout.shape[2], wo = dout.shape[3]
    dtype = np.float32 if real is float else np.float64
    dx = np.zeros((n, c, h, w), dtype=dtype)
    cdef real[:, :, :, ::1] d = dx
    cdef Py_ssize_t i, ci, oy, ox
    cdef int j
    for i in range(n):
        for ci in range(c):
            for oy in range(ho):
                for ox in range(wo):
                    j = arg[i, ci, oy, ox]
                    d[i, ci, 2 * oy + j // 2, 2 * ox + j % 2] = dout[i, ci, oy, ox]
    return dx


def hog_votes(const double[:, ::1] img, int bins):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    votes = np.zeros((h, w, bins), dtype=np.float64)
    cdef double[:, :, ::1] v = votes
    cdef Py_ssize_t y, x, xl, xr, yu, yd
    cdef double gx, gy, mag, theta, pos, k0, frac
    cdef double binw = 180.0 / bins
    cdef long b0, b1
    for y in range(h):
        yu = y - 1 if y > 0 else 0
        yd = y + 1 if y < h - 1 else h - 1
        for x in range(w):
            xl = x - 1 if x > 0 else 0
            xr = x + 1 if x < w - 1 else w - 1
            gx = img[y, xr] - img[y, xl]
            gy = img[yd, x] - img[yu, x]
            mag = sqrt(gx * gx + gy * gy)
            if mag == 0.0:
                continue
            theta = atan2(gy, gx) * (180.0 / M_PI)
            theta = fmod(theta, 180.0)
            if theta < 0.0:
                theta += 180.0
            if theta >= 180.0:
                theta = 0.0
            pos = theta / binw - 0.5
            k0 = floor(pos)
            frac = pos - k0
            b0 = (<long>k0) % bins
            if b0 < 0:
                b0 += bins
            b1 = (b0 + 1) % bins
            v[y, x, b0] += (1.0 - frac) * mag
            v[y, x, b1] += frac * mag
    return votes


cdef inline cnp.uint8_t _sample(const cnp.uint8_t[:, ::1] img, double gx, double gy) nogil:
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t x0, y0, x1, y1
    cdef double fx, fy, top, bot, val
    if gx < 0.0:
        gx = 0.0
    elif gx > w - 1.0:
        gx = w - 1.0
    if gy < 0.0:
        gy = 0.0
    elif gy > h - 1.0:
        gy = h - 1.0
    x0 = <Py_ssize_t>floor(gx)
    y0 = <Py_ssize_t>floor(gy)
    x1 = x0 + 1 if x0 + 1 < w else w - 1
    y1 = y0 + 1 if y0 + 1 < h else h - 1
    fx = gx - x0
    fy = gy - y0
    top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x1]
    bot = (1.0 - fx) * img[y1, x0] + fx * img[y1, x1]
    val = floor((1.0 - fy) * top + fy * bot + 0.5)
    if val < 0.0:
        return 0
    if val > 255.0:
        return 255
    return <cnp.uint8_t>val


def resize_bilinear(const cnp.uint8_t[:, ::1] img, int out_h, int out_w):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out = np.empty((out_h, out_w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef Py_ssize_t u, v
    cdef double gx, gy
    with nogil:
        for v in range(out_h):
            gy = (v + 0.5) * h / out_h - 0.5
            for u in range(out_w):
                gx = (u + 0.5) * w / out_w - 0.5
                o[v, u] = _sample(img, gx, gy)
    return out


def warp_bilinear(const cnp.uint8_t[:, ::1] img, const double[:, ::1] hinv):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef Py_ssize_t u, v
    cdef double qx, qy, px, py, pw, sx, sy
    with nogil:
        for v in range(h):
            qy = v + 0.5
            for u in range(w):
                qx = u + 0.5
                px = hinv[0, 0] * qx + hinv[0, 1] * qy + hinv[0, 2]
                py = hinv[1, 0] * qx + hinv[1, 1] * qy + hinv[1, 2]
                pw = hinv[2, 0] * qx + hinv[2, 1] * qy + hinv[2, 2]
                if fabs(pw) < 1e-12:
                    continue
                sx = px / pw
                sy = py / pw
                if sx < 0.0 or sx > w or sy < 0.0 or sy > h:
                    continue
                o[v, u] = _sample(img, sx - 0.5, sy - 0.5)
    return out

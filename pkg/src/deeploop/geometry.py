"""Four-point homographies and projective image warping.

Points live in continuous pixel coordinates where the image occupies
[0, W] x [0, H]; the corner quad of a W x H image is therefore
((0, 0), (0, H), (W, 0), (W, H)).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DegeneratePointsError, NonInvertibleHomographyError, PointAtInfinityError
from .image import GrayImage


class Point2(NamedTuple):
    x: float
    y: float


class PointQuad(NamedTuple):
    """Four points ordered top-left, bottom-left, top-right, bottom-right."""

    top_left: Point2
    bottom_left: Point2
    top_right: Point2
    bottom_right: Point2

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)


def corner_quad(width: float, height: float) -> PointQuad:
    return PointQuad(Point2(0.0, 0.0), Point2(0.0, height), Point2(width, 0.0), Point2(width, height))


@dataclass(frozen=True, eq=False)
class Homography:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=np.float64).reshape(3, 3)
        if m[2, 2] != 0.0:
            m = m / m[2, 2]
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> Homography:
        return cls(np.eye(3))

    @classmethod
    def translation(cls, dx: float, dy: float) -> Homography:
        return cls(np.array([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]]))

    def is_invertible(self) -> bool:
        return abs(np.linalg.det(self.m)) > 1e-12

    def inverse(self) -> Homography:
        if not self.is_invertible():
            raise NonInvertibleHomographyError("homography is singular")
        return Homography(np.linalg.inv(self.m))

    def __matmul__(self, other: Homography) -> Homography:
        return Homography(self.m @ other.m)


def random_four_points(width: int, height: int, rng: np.random.Generator) -> PointQuad:
    """One uniform point in each corner box of size (W/4) x (H/4)."""
    qw, qh = width / 4.0, height / 4.0
    # draw order: x then y, for TL, BL, TR, BR
    u = rng.random(8)
    tl = Point2(u[0] * qw, u[1] * qh)
    bl = Point2(u[2] * qw, height - qh + u[3] * qh)
    tr = Point2(width - qw + u[4] * qw, u[5] * qh)
    br = Point2(width - qw + u[6] * qw, height - qh + u[7] * qh)
    return PointQuad(tl, bl, tr, br)


def _check_general_position(pts: np.ndarray, what: str) -> None:
    span = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1e-300)
    for i, j, k in combinations(range(4), 3):
        a, b, c = pts[i], pts[j], pts[k]
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(area2) <= 1e-9 * span * span:
            raise DegeneratePointsError(f"{what} points {i}, {j}, {k} are collinear")


def _similarity_normalizer(pts: np.ndarray) -> np.ndarray:
    """Translate the centroid to the origin and scale mean distance to sqrt(2)."""
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    s = np.sqrt(2.0) / d
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting; raises on a (near) singular pivot."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = len(b)
    scale = np.abs(a).max()
    if scale == 0.0:
        raise DegeneratePointsError("system matrix is zero")
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) <= 1e-12 * scale:
            raise DegeneratePointsError("singular point configuration")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        f = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= f[:, None] * a[col, col:]
        b[col + 1:] -= f * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


def homography_from_four_points(src: PointQuad, dst: PointQuad) -> Homography:
    """Exact homography mapping each ``src[i]`` onto ``dst[i]``.

    Both quads are first normalized (centroid at the origin, mean radius
    sqrt(2)) so the 8x8 system stays well conditioned at pixel scales; the
    result is denormalized and scaled to m[2][2] = 1.
    """
    s = np.asarray(src, dtype=np.float64).reshape(4, 2)
    d = np.asarray(dst, dtype=np.float64).reshape(4, 2)
    if not (np.isfinite(s).all() and np.isfinite(d).all()):
        raise DegeneratePointsError("non-finite point coordinates")
    _check_general_position(s, "source")
    _check_general_position(d, "destination")
    ts, td = _similarity_normalizer(s), _similarity_normalizer(d)
    sn = s @ ts[:2, :2].T + ts[:2, 2]
    dn = d @ td[:2, :2].T + td[:2, 2]
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(sn, dn)):
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    h = solve_linear(a, b)
    hn = np.append(h, 1.0).reshape(3, 3)
    m = np.linalg.inv(td) @ hn @ ts
    if abs(m[2, 2]) < 1e-300:
        raise DegeneratePointsError("homography maps the origin to infinity")
    return Homography(m / m[2, 2])


def apply_homography(h: Homography, p) -> Point2:
    x, y = float(p[0]), float(p[1])
    m = h.m
    xp = m[0, 0] * x + m[0, 1] * y + m[0, 2]
    yp = m[1, 0] * x + m[1, 1] * y + m[1, 2]
    wp = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(wp) < 1e-12:
        raise PointAtInfinityError(f"point ({x}, {y}) maps to infinity")
    return Point2(xp / wp, yp / wp)


def warp_image(img: GrayImage, h: Homography) -> GrayImage:
    """Warp ``img`` by ``h``; output pixels sample the source at h^-1 * q.

    Samples landing outside the source rectangle are 0.
    """
    hinv = h.inverse()
    return GrayImage(img.width, img.height, kernels.warp_bilinear(img.data, hinv.m))

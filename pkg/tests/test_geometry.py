import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deeploop.errors import DegeneratePointsError, NonInvertibleHomographyError, PointAtInfinityError
from deeploop.geometry import (
    Homography,
    PointQuad,
    apply_homography,
    corner_quad,
    homography_from_four_points,
    random_four_points,
    solve_linear,
    warp_image,
)
from deeploop.image import GrayImage

from conftest import random_image


def dlt_svd(src, dst):
    """Independent oracle: null space of the 8x9 DLT matrix."""
    rows = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    m = np.linalg.svd(np.array(rows, float))[2][-1].reshape(3, 3)
    return m / m[2, 2]


def test_corner_quad_order():
    assert corner_quad(160, 120) == ((0, 0), (0, 120), (160, 0), (160, 120))


def test_unit_square_scaling():
    h = homography_from_four_points(corner_quad(1, 1), corner_quad(2, 2))
    np.testing.assert_allclose(h.m, np.diag([2.0, 2.0, 1.0]), atol=1e-14)


def test_projective_frozen():
    # unit square onto a quad with one corner pulled out to (2, 2)
    h = homography_from_four_points(corner_quad(1, 1), PointQuad((0, 0), (0, 1), (1, 0), (2, 2)))
    # m = [[a,0,0],[0,a,0],[g,g,1]]; (1,0)->(1,0) gives a = g+1, (1,1)->(2,2) gives a = 2(2g+1)
    expected = np.array([[2 / 3, 0.0, 0.0], [0.0, 2 / 3, 0.0], [-1 / 3, -1 / 3, 1.0]])
    np.testing.assert_allclose(h.m, dlt_svd(corner_quad(1, 1), PointQuad((0, 0), (0, 1), (1, 0), (2, 2))),
                               atol=1e-12)
    np.testing.assert_allclose(h.m, expected, atol=1e-12)


def test_matches_svd_oracle(rng):
    for _ in range(50):
        src = random_four_points(160, 120, rng)
        h = homography_from_four_points(src, corner_quad(160, 120))
        np.testing.assert_allclose(h.m, dlt_svd(src, corner_quad(160, 120)), rtol=1e-7, atol=1e-10)


def test_reprojection_1000(rng):
    worst = 0.0
    for _ in range(1000):
        src = random_four_points(160, 120, rng)
        dst = corner_quad(160, 120)
        h = homography_from_four_points(src, dst)
        for p, q in zip(src, dst):
            worst = max(worst, np.hypot(*np.subtract(apply_homography(h, p), q)))
    assert worst <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-500, 500), min_size=8, max_size=8))
def test_reprojection_property(coords):
    dst = PointQuad(*np.array(coords).reshape(4, 2))
    src = corner_quad(160, 120)
    try:
        h = homography_from_four_points(src, dst)
    except DegeneratePointsError:
        return
    # exact points may legitimately land at infinity only when dst is degenerate, which is rejected
    for p, q in zip(src, dst):
        r = apply_homography(h, p)
        assert np.hypot(r[0] - q[0], r[1] - q[1]) <= 1e-6 * (1 + np.abs(q).max())


def test_random_four_points_boxes(rng):
    for _ in range(200):
        q = random_four_points(160, 120, rng).as_array()
        tl, bl, tr, br = q
        assert 0 <= tl[0] < 40 and 0 <= tl[1] < 30
        assert 0 <= bl[0] < 40 and 90 <= bl[1] <= 120
        assert 120 <= tr[0] <= 160 and 0 <= tr[1] < 30
        assert 120 <= br[0] <= 160 and 90 <= br[1] <= 120


def test_random_four_points_deterministic():
    a = random_four_points(160, 120, np.random.default_rng(5))
    b = random_four_points(160, 120, np.random.default_rng(5))
    assert a == b


def test_collinear_rejected():
    bad = PointQuad((0, 0), (1, 1), (2, 2), (5, 0))
    with pytest.raises(DegeneratePointsError):
        homography_from_four_points(bad, corner_quad(1, 1))
    with pytest.raises(DegeneratePointsError):
        homography_from_four_points(corner_quad(1, 1), PointQuad((0, 0), (0, 0), (1, 0), (1, 1)))


def test_solve_linear_matches_numpy(rng):
    a = rng.standard_normal((8, 8))
    b = rng.standard_normal(8)
    np.testing.assert_allclose(solve_linear(a, b), np.linalg.solve(a, b), rtol=1e-10)
    with pytest.raises(DegeneratePointsError):
        solve_linear(np.ones((3, 3)), np.ones(3))


def test_homography_algebra():
    h = Homography(np.array([[2.0, 0.1, 3.0], [0.0, 1.5, -1.0], [0.001, 0.002, 1.0]]) * 4)
    assert h.m[2, 2] == 1.0
    np.testing.assert_allclose((h @ h.inverse()).m, np.eye(3), atol=1e-12)
    with pytest.raises(NonInvertibleHomographyError):
        Homography(np.array([[1.0, 2, 3], [2, 4, 6], [0, 0, 1]])).inverse()


def test_point_at_infinity():
    h = Homography(np.array([[1.0, 0, 0], [0, 1, 0], [1, 0, 1]]))
    with pytest.raises(PointAtInfinityError):
        apply_homography(h, (-1.0, 5.0))


class TestWarp:
    def test_identity_exact(self, rng):
        img = random_image(rng)
        assert warp_image(img, Homography.identity()) == img

    @pytest.mark.parametrize("dx, dy", [(3, 2), (-5, 7), (0, -4)])
    def test_translation_is_index_shift(self, rng, dx, dy):
        img = random_image(rng)
        out = warp_image(img, Homography.translation(dx, dy)).data
        ys = slice(max(dy, 0), 120 + min(dy, 0))
        xs = slice(max(dx, 0), 160 + min(dx, 0))
        src = img.data[max(-dy, 0):120 - max(dy, 0), max(-dx, 0):160 - max(dx, 0)]
        np.testing.assert_array_equal(out[ys, xs], src)
        # uncovered margins are zero-filled
        if dx > 0:
            assert np.all(out[:, :dx] == 0)

    def test_inner_quad_never_zero_fills(self, rng):
        img = GrayImage.from_array(rng.integers(1, 256, size=(120, 160), dtype=np.uint8))
        for _ in range(10):
            h = homography_from_four_points(random_four_points(160, 120, rng), corner_quad(160, 120))
            assert np.all(warp_image(img, h).data > 0)

    def test_half_pixel_translation_averages(self):
        img = GrayImage.from_array(np.array([[0, 100, 200, 50]] * 3, np.uint8))
        out = warp_image(img, Homography.translation(0.5, 0)).data
        # sample at x - 0.5 in pixel-center units: midpoints of neighbours
        np.testing.assert_array_equal(out[1], [0, 50, 150, 125])

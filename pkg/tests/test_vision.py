"""Mask geometry: hull properties, width and tip extraction."""

import numpy as np
import pytest

from thermocut.camera import FRAME_HEIGHT, FRAME_WIDTH, ThermalFrame
from thermocut.vision import (
    NoDetectionError,
    boundary_points,
    convex_hull,
    estimate_tip,
    measure_width,
)


def frame_from_mask(mask: np.ndarray, hot: float = 80.0,
                    cold: float = 20.0) -> ThermalFrame:
    px = np.where(mask, hot, cold).astype(np.float32)
    return ThermalFrame(pixels=px)


def empty_mask() -> np.ndarray:
    return np.zeros((FRAME_HEIGHT, FRAME_WIDTH), dtype=bool)


def test_width_zero_on_cold_frame():
    assert measure_width(frame_from_mask(empty_mask())) == 0.0


def test_rectangle_width_counts_pixels():
    mask = empty_mask()
    mask[100:120, 50:90] = True  # 20 px across track
    frame = frame_from_mask(mask)
    assert measure_width(frame) == pytest.approx(20 / 4.81 * 1e-3, rel=1e-12)


def test_width_monotone_in_threshold():
    rng = np.random.default_rng(4)
    px = (20.0 + 50.0 * rng.random((FRAME_HEIGHT, FRAME_WIDTH))).astype(
        np.float32)
    px[130:150, 200:260] += 30.0
    frame = ThermalFrame(pixels=px)
    assert measure_width(frame, 55.0) >= measure_width(frame, 60.0)


def test_hull_width_covers_each_blob():
    mask = empty_mask()
    mask[100:110, 40:60] = True
    mask[140:160, 200:240] = True
    frame = frame_from_mask(mask)
    # combined hull spans rows 100..159
    assert measure_width(frame) == pytest.approx(60 / 4.81 * 1e-3, rel=1e-12)


def test_single_hot_pixel_tip():
    mask = empty_mask()
    mask[50, 100] = True
    tip = estimate_tip(frame_from_mask(mask))
    np.testing.assert_allclose(tip, [100 / 4.81 * 1e-3, 50 / 4.81 * 1e-3],
                               rtol=1e-12)


def test_disk_tip_on_rightmost_edge():
    mask = empty_mask()
    cc, rr = np.meshgrid(np.arange(FRAME_WIDTH), np.arange(FRAME_HEIGHT))
    centre = (150.0, 120.0)
    mask[(cc - centre[0]) ** 2 + (rr - centre[1]) ** 2 <= 10.0 ** 2] = True
    tip = estimate_tip(frame_from_mask(mask))
    assert tip[0] == pytest.approx((150 + 10) / 4.81 * 1e-3, rel=1e-9)
    assert tip[1] == pytest.approx(120 / 4.81 * 1e-3, rel=1e-9)


def test_tip_translation_equivariance():
    mask = empty_mask()
    mask[100:115, 60:100] = True
    t1 = estimate_tip(frame_from_mask(mask))
    shifted = np.roll(np.roll(mask, 17, axis=0), 23, axis=1)
    t2 = estimate_tip(frame_from_mask(shifted))
    np.testing.assert_allclose(t2 - t1,
                               [23 / 4.81 * 1e-3, 17 / 4.81 * 1e-3],
                               rtol=1e-9)


def test_no_detection_raises():
    with pytest.raises(NoDetectionError):
        estimate_tip(frame_from_mask(empty_mask()))


def test_hull_contains_all_points_random_masks():
    rng = np.random.default_rng(12)
    for _ in range(10):
        mask = empty_mask()
        for _ in range(rng.integers(1, 4)):
            r = rng.integers(0, FRAME_HEIGHT - 30)
            c = rng.integers(0, FRAME_WIDTH - 30)
            mask[r:r + rng.integers(2, 30), c:c + rng.integers(2, 30)] = True
        pts = boundary_points(mask)
        hull = convex_hull(pts)
        assert hull.shape[0] <= pts.shape[0]
        # all boundary points inside or on the hull (cross-product test)
        closed = np.vstack([hull, hull[:1]])
        for a, b in zip(closed[:-1], closed[1:]):
            edge = b - a
            rel = pts - a
            crosses = edge[0] * rel[:, 1] - edge[1] * rel[:, 0]
            assert np.all(crosses >= 0)


def test_hull_of_collinear_points():
    pts = np.array([[0, 0], [1, 1], [2, 2], [3, 3]])
    hull = convex_hull(pts)
    assert {tuple(p) for p in hull} >= {(0, 0), (3, 3)}

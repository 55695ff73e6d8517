"""Renderer: determinism, lag behaviour, noise statistics, path parity."""

import numpy as np
import pytest

import thermocut.camera as cam
from thermocut.camera import (
    CameraModel,
    RenderCache,
    ThermalFrame,
    render_frame,
    true_field,
    write_pgm,
)
from thermocut.thermal import SensorModel, ThermalParams, temperature_at

TISSUE = ThermalParams(conductivity=40.0, density=1090.0,
                       specific_heat=3421.0, ambient=20.0, isotherm=60.0,
                       linear_power=8000.0, depth=0.002)
SENSOR = SensorModel(tau=0.0176, noise_sigma=0.32)
CAMERA = CameraModel()


def test_render_deterministic():
    a = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                     SENSOR, seed=7, frame_index=3)
    b = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                     SENSOR, seed=7, frame_index=3)
    assert np.array_equal(a.pixels, b.pixels)
    c = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                     SENSOR, seed=8, frame_index=3)
    assert not np.array_equal(a.pixels, c.pixels)


def test_cold_source_relaxes_to_ambient():
    quiet = SensorModel(tau=0.0176, noise_sigma=0.0)
    hot = ThermalFrame(pixels=np.full((288, 384), 35.0, dtype=np.float32))
    frame = hot
    for i in range(40):
        frame = render_frame(CAMERA, [0.0, 0.0], 0.0, TISSUE, frame,
                             0.04, quiet, seed=0, frame_index=i)
    np.testing.assert_allclose(frame.pixels, 20.0, atol=1e-4)


def test_fast_sensor_consecutive_frames_identical():
    instant = SensorModel(tau=1e-6, noise_sigma=0.0)
    f1 = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                      instant, seed=1, frame_index=0)
    f2 = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, f1, 0.04,
                      instant, seed=1, frame_index=0)
    np.testing.assert_allclose(f1.pixels, f2.pixels, atol=1e-4)


def test_noise_statistics():
    quiet = SensorModel(tau=1e-6, noise_sigma=0.0)
    noisy = SensorModel(tau=1e-6, noise_sigma=0.32)
    base = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                        quiet, seed=5, frame_index=0)
    withn = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                         noisy, seed=5, frame_index=0)
    resid = (withn.pixels - base.pixels).astype(float)
    assert abs(resid.mean()) < 0.01
    assert resid.std() == pytest.approx(0.32, abs=0.01)


def test_field_matches_temperature_at():
    field = true_field(CAMERA, np.zeros(2), 0.007, TISSUE)
    px_m = 1e-3 / CAMERA.px_per_mm
    # the renderer quantises the source position to 1/8 px
    col_q = round(CAMERA.anchor_col * 8.0) / 8.0
    row_q = round(CAMERA.anchor_row * 8.0) / 8.0
    rng = np.random.default_rng(3)
    for _ in range(60):
        i = int(rng.integers(0, 288))
        j = int(rng.integers(0, 384))
        xi = (j - col_q) * px_m
        y = (i - row_q) * px_m
        exact = temperature_at(xi, y, 0.007, TISSUE)
        assert field[i, j] == pytest.approx(exact, abs=5e-3)


def test_numpy_fallback_matches_numba(monkeypatch):
    if not cam._USE_NUMBA:
        pytest.skip("numba path not active")
    args = (CAMERA, np.zeros(2), 0.007, TISSUE, None, 0.04, SENSOR)
    fast = render_frame(*args, seed=11, frame_index=4)
    monkeypatch.setattr(cam, "_USE_NUMBA", False)
    slow = render_frame(*args, seed=11, frame_index=4)
    np.testing.assert_allclose(fast.pixels, slow.pixels, atol=1e-3)


def test_cache_reuse_changes_nothing():
    cache = RenderCache()
    a = render_frame(CAMERA, [1e-4, 0.0], 0.005, TISSUE, None, 0.04,
                     SENSOR, seed=2, frame_index=0, cache=cache)
    b = render_frame(CAMERA, [1e-4, 0.0], 0.005, TISSUE, None, 0.04,
                     SENSOR, seed=2, frame_index=0, cache=cache)
    assert np.array_equal(a.pixels, b.pixels)
    assert len(cache.entries) == 1


def test_write_pgm_format(tmp_path):
    frame = render_frame(CAMERA, [0.0, 0.0], 0.007, TISSUE, None, 0.04,
                         SENSOR, seed=1, frame_index=0)
    path = tmp_path / "frame.pgm"
    write_pgm(frame, path)
    blob = path.read_bytes()
    assert blob.startswith(b"P5\n384 288\n65535\n")
    data = np.frombuffer(blob.split(b"65535\n", 1)[1], dtype=">u2")
    assert data.size == 384 * 288
    # centi-degree encoding round-trips ambient pixels
    corner = data.reshape(288, 384)[0, 0] / 100.0
    assert corner == pytest.approx(float(frame.pixels[0, 0]), abs=0.006)

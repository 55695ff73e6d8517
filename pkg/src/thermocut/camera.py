"""Synthetic radiometric camera: analytic field, sensor lag, pixel noise.

Each frame is the steady co-moving temperature field sampled on the
pixel lattice, passed through the first-order sensor lag, plus white
per-pixel noise. Noise values come from a counter-based hash of
(seed, frame index, pixel), so frames are bit-reproducible regardless of
call order or thread count.

Rendering quantises the source position to 1/8 px and its speed to
0.01 mm/s; both are far below pixel and noise scales, and they let the
renderer reuse the (expensive) noiseless field between frames whenever
the world state is effectively unchanged. Hot loops are numba-compiled;
a pure-numpy fallback (THERMOCUT_NO_NUMBA=1) computes the same frames.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .bessel import EULER_GAMMA
from .thermal import SensorModel, ThermalParams

FRAME_WIDTH = 384
FRAME_HEIGHT = 288
PX_PER_MM = 4.81

# Chebyshev tail of sqrt(x)*exp(x)*K0(x) truncated for float32 frames
# (max relative error ~5e-10); same generator as bessel._CHEB.
_CHEB32 = np.array([
    1.2201515410329777273, -0.031448101311964500543,
    0.0015698838857300533749, -0.00012849549581627802638,
    0.000013949813718876499364, -1.8317555227191194848e-6,
    2.7668136394450150761e-7, -4.6604898976879476656e-8,
    8.5740340174142260858e-9, -1.6975345093890615156e-9,
    3.5773972814003284472e-10,
])

_U64 = np.uint64
_MIX_1 = _U64(0x9E3779B97F4A7C15)
_MIX_2 = _U64(0xBF58476D1CE4E5B9)
_MIX_3 = _U64(0x94D049BB133111EB)
_ROW_STRIDE = _U64(0x100000001B3)
_FRAME_SALT = _U64(0x51ED270B)

# Acklam's rational approximation of the inverse normal CDF.
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02,
          -2.759285104469687e+02, 1.383577518672690e+02,
          -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02,
          -1.556989798598866e+02, 6.680131188771972e+01,
          -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01,
          -2.400758277161838e+00, -2.549732539343734e+00,
          4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01,
          2.445134137142996e+00, 3.754408661907416e+00)
_ACK_SPLIT = 0.02425
_U53 = 1.0 / 9007199254740992.0


@dataclass
class ThermalFrame:
    """One radiometric frame in degrees C with its pixel scale."""

    pixels: np.ndarray
    px_per_mm: float = PX_PER_MM
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.pixels.shape != (FRAME_HEIGHT, FRAME_WIDTH):
            raise ValueError(f"frame must be {FRAME_HEIGHT}x{FRAME_WIDTH}")
        if not self.px_per_mm > 0.0:
            raise ValueError("px_per_mm must be positive")


@dataclass(frozen=True)
class CameraModel:
    """Fixed camera geometry: the anchor pixel is the neutral tip site."""

    anchor_col: float = 288.3
    anchor_row: float = 144.3
    px_per_mm: float = PX_PER_MM
    u_floor: float = 3e-4  # m/s; below this the source is treated as off


@dataclass
class RenderCache:
    """Most-recent noiseless fields keyed by quantised world state."""

    capacity: int = 8
    entries: dict = field(default_factory=dict)

    def get(self, key):
        return self.entries.get(key)

    def put(self, key, value) -> None:
        if len(self.entries) >= self.capacity:
            self.entries.pop(next(iter(self.entries)))
        self.entries[key] = value


def _field_numpy(xs: np.ndarray, ys: np.ndarray, amp: float,
                 ambient: float) -> np.ndarray:
    """Noiseless field on dimensionless grid columns xs, rows ys."""
    x = xs[None, :]
    y = ys[:, None]
    r = np.hypot(x, y)
    r = np.maximum(r, 1e-9)
    out = np.empty((ys.size, xs.size))
    small = r <= 2.0
    q = 0.25 * r * r
    term = np.ones_like(r)
    i0 = np.ones_like(r)
    ksum = np.zeros_like(r)
    harmonic = 0.0
    for k in range(1, 21):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 += term
        ksum += term * harmonic
    k0_small = -(np.log(0.5 * r) + EULER_GAMMA) * i0 + ksum
    t = 4.0 / r - 1.0
    t2 = 2.0 * t
    b0 = np.zeros_like(r)
    b1 = np.zeros_like(r)
    for c in _CHEB32[::-1]:
        b0, b1 = t2 * b0 - b1 + c, b0
    k0e_large = (b0 - t * b1) / np.sqrt(r)
    decay = np.exp(-np.clip(x + r, None, 700.0))
    out = np.where(small,
                   amp * np.exp(-np.clip(x, None, 700.0)) * k0_small,
                   amp * decay * k0e_large)
    return (ambient + out).astype(np.float32)


def _noise_numpy(seed: int, frame_index: int) -> np.ndarray:
    """Standard-normal noise plane from the counter-based hash."""
    def mix(z):
        z = z + _MIX_1
        z = (z ^ (z >> _U64(30))) * _MIX_2
        z = (z ^ (z >> _U64(27))) * _MIX_3
        return z ^ (z >> _U64(31))

    with np.errstate(over="ignore"):
        base = mix(np.array(seed, dtype=np.uint64)) ^ mix(
            np.array(frame_index, dtype=np.uint64) + _FRAME_SALT)
        rows = np.arange(FRAME_HEIGHT, dtype=np.uint64) * _MIX_1
        cols = np.arange(FRAME_WIDTH, dtype=np.uint64) * _ROW_STRIDE
        keys = mix(base ^ (rows[:, None] + cols[None, :]))
    u = (np.float64(keys >> _U64(11)) + 0.5) * _U53
    return _norminv_numpy(u)


def _norminv_numpy(p: np.ndarray) -> np.ndarray:
    out = np.empty_like(p)
    lo = p < _ACK_SPLIT
    hi = p > 1.0 - _ACK_SPLIT
    mid = ~(lo | hi)
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D

    def tail(q):
        num = ((((c[0]*q + c[1])*q + c[2])*q + c[3])*q + c[4])*q + c[5]
        den = (((d[0]*q + d[1])*q + d[2])*q + d[3])*q + 1.0
        return num / den

    if lo.any():
        q = np.sqrt(-2.0 * np.log(p[lo]))
        out[lo] = tail(q)
    if hi.any():
        q = np.sqrt(-2.0 * np.log(1.0 - p[hi]))
        out[hi] = -tail(q)
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        num = (((((a[0]*r + a[1])*r + a[2])*r + a[3])*r + a[4])*r + a[5]) * q
        den = ((((b[0]*r + b[1])*r + b[2])*r + b[3])*r + b[4])*r + 1.0
        out[mid] = num / den
    return out


_USE_NUMBA = os.environ.get("THERMOCUT_NO_NUMBA", "") != "1"
if _USE_NUMBA:
    try:
        from ._render_kernels import add_noise_kernel, field_kernel
    except ImportError:
        _USE_NUMBA = False


def _quantise(camera: CameraModel, tip_m: np.ndarray, u: float,
              tissue: ThermalParams) -> tuple:
    # 1/4 px (52 um) and 0.05 mm/s buckets: both far below the pixel
    # pitch and the noise floor, and coarse enough that steady frames
    # reuse the cached field.
    tip_col = camera.anchor_col + tip_m[0] * 1e3 * camera.px_per_mm
    tip_row = camera.anchor_row + tip_m[1] * 1e3 * camera.px_per_mm
    tip_col = round(tip_col * 4.0) / 4.0
    tip_row = round(tip_row * 4.0) / 4.0
    u_q = round(u / 5e-5) * 5e-5
    return (tip_col, tip_row, u_q, tissue.linear_power, tissue.conductivity,
            tissue.diffusivity, tissue.ambient)


def true_field(camera: CameraModel, tip_m: np.ndarray, u: float,
               tissue: ThermalParams,
               cache: RenderCache | None = None) -> np.ndarray:
    """Noiseless lag-free field on the full lattice (float32, deg C)."""
    if u < camera.u_floor:
        return np.full((FRAME_HEIGHT, FRAME_WIDTH), tissue.ambient,
                       dtype=np.float32)
    key = _quantise(camera, tip_m, u, tissue)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    tip_col, tip_row, u_q = key[0], key[1], key[2]
    scale = u_q / (2.0 * tissue.diffusivity)  # 1/m
    px_m = 1e-3 / camera.px_per_mm
    if tissue.source_strength is None:
        amp = tissue.linear_power / (2.0 * math.pi * tissue.conductivity)
    else:
        amp = (tissue.source_strength * u_q
               / (2.0 * math.pi * tissue.conductivity))
    xs = (np.arange(FRAME_WIDTH) - tip_col) * (px_m * scale)
    ys = (np.arange(FRAME_HEIGHT) - tip_row) * (px_m * scale)
    if _USE_NUMBA:
        out = np.empty((FRAME_HEIGHT, FRAME_WIDTH), dtype=np.float32)
        field_kernel(xs, ys, amp, tissue.ambient, out)
    else:
        out = _field_numpy(xs, ys, amp, tissue.ambient)
    if cache is not None:
        cache.put(key, out)
    return out


def _active_window(truth: np.ndarray, level: float,
                   margin: int = 6) -> tuple[int, int, int, int]:
    """Bounding box of pixels above level, padded by margin."""
    hot = truth > level
    rows = np.flatnonzero(hot.any(axis=1))
    if rows.size == 0:
        return 0, 0, 0, 0
    cols = np.flatnonzero(hot.any(axis=0))
    return (max(int(rows[0]) - margin, 0),
            min(int(rows[-1]) + margin + 1, truth.shape[0]),
            max(int(cols[0]) - margin, 0),
            min(int(cols[-1]) + margin + 1, truth.shape[1]))


def render_frame(camera: CameraModel, tip_m, u: float,
                 tissue: ThermalParams, prev: ThermalFrame | None,
                 dt: float, sensor: SensorModel, seed: int,
                 frame_index: int, timestamp: float = 0.0,
                 cache: RenderCache | None = None,
                 noise_mode: str = "full") -> ThermalFrame:
    """One lagged, noisy frame of the world state.

    prev is the previous *measured* frame (None starts the sensor at
    ambient). dt is the time since that frame. noise_mode "active"
    restricts the per-pixel noise to the thermally active window (far
    field sits >100 sigma below any threshold, so masks and downstream
    results are bit-identical to the full pass, at a fraction of the
    cost); noisy pixels themselves are identical in both modes.
    """
    if not dt > 0.0:
        raise ValueError("render_frame requires dt > 0")
    if noise_mode not in ("full", "active"):
        raise ValueError("noise_mode must be 'full' or 'active'")
    tip_m = np.asarray(tip_m, dtype=float)
    truth = true_field(camera, tip_m, u, tissue, cache)
    if prev is None:
        prev_px = np.full_like(truth, tissue.ambient)
    else:
        prev_px = prev.pixels
    beta = np.float32(math.exp(-dt / sensor.tau))
    sigma = np.float32(sensor.noise_sigma)
    if noise_mode == "active" and sigma > 0.0:
        window = _active_window(truth, tissue.ambient + 15.0)
    else:
        window = (0, FRAME_HEIGHT, 0, FRAME_WIDTH)
    if sigma == 0.0:
        window = (0, 0, 0, 0)
    out = truth + (prev_px - truth) * beta
    r0, r1, c0, c1 = window
    if r1 > r0 and c1 > c0:
        if _USE_NUMBA:
            add_noise_kernel(out, sigma,
                             _U64(seed & 0xFFFFFFFFFFFFFFFF),
                             _U64(frame_index), r0, r1, c0, c1)
        else:
            noise = _noise_numpy(seed & 0xFFFFFFFFFFFFFFFF, frame_index)
            out[r0:r1, c0:c1] += (
                sigma * noise[r0:r1, c0:c1]).astype(np.float32)
    return ThermalFrame(pixels=out, px_per_mm=camera.px_per_mm,
                        timestamp=timestamp)


def write_pgm(frame: ThermalFrame, path) -> None:
    """16-bit binary PGM in centi-degrees C, row-major."""
    scaled = np.clip(np.round(frame.pixels * 100.0), 0, 65535).astype(">u2")
    header = f"P5\n{scaled.shape[1]} {scaled.shape[0]}\n65535\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(scaled.tobytes())

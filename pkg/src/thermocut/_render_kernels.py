"""Numba-compiled hot loops for frame rendering.

Kept separate so importing the package stays cheap when rendering is
never used, and so the pure-numpy fallback in camera.py has a single
authoritative twin to match (the renderer cross-check test compares the
two paths).
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64

_CHEB32 = np.array([
    1.2201515410329777273, -0.031448101311964500543,
    0.0015698838857300533749, -0.00012849549581627802638,
    0.000013949813718876499364, -1.8317555227191194848e-6,
    2.7668136394450150761e-7, -4.6604898976879476656e-8,
    8.5740340174142260858e-9, -1.6975345093890615156e-9,
    3.5773972814003284472e-10,
])

_EULER_GAMMA = 0.5772156649015329


@njit(inline="always")
def _k0_small(r: float) -> float:
    """K0(r) for 0 < r <= 2, ascending series with early exit."""
    q = 0.25 * r * r
    term = 1.0
    i0 = 1.0
    ksum = 0.0
    harmonic = 0.0
    for k in range(1, 21):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 += term
        ksum += term * harmonic
        if term < 1e-10:
            break
    return -(np.log(0.5 * r) + _EULER_GAMMA) * i0 + ksum


@njit(parallel=False, fastmath=True, cache=True)
def field_kernel(xs, ys, amp, ambient, out):
    """Noiseless field on the dimensionless lattice (xs columns, ys rows)."""
    height = ys.shape[0]
    width = xs.shape[0]
    n_cheb = _CHEB32.shape[0]
    for i in range(height):
        y = ys[i]
        for j in range(width):
            x = xs[j]
            r = np.sqrt(x * x + y * y)
            if r < 1e-9:
                r = 1e-9
            if r <= 2.0:
                out[i, j] = ambient + amp * np.exp(-x) * _k0_small(r)
            else:
                arg = x + r
                if arg > 700.0:
                    out[i, j] = ambient
                else:
                    t = 4.0 / r - 1.0
                    t2 = 2.0 * t
                    b0 = 0.0
                    b1 = 0.0
                    for k in range(n_cheb - 1, -1, -1):
                        b0, b1 = t2 * b0 - b1 + _CHEB32[k], b0
                    out[i, j] = ambient + amp * np.exp(-arg) \
                        * (b0 - t * b1) / np.sqrt(r)


@njit(inline="always")
def _mix64(z):
    z = z + U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(inline="always")
def _norm_inv(p: float) -> float:
    if p < 0.02425:
        q = np.sqrt(-2.0 * np.log(p))
        return ((((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                    - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
                  + 4.374664141464968e+00) * q + 2.938163982698783e+00)
                / ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
                     + 2.445134137142996e+00) * q
                    + 3.754408661907416e+00) * q + 1.0))
    if p > 0.97575:
        q = np.sqrt(-2.0 * np.log(1.0 - p))
        return -((((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                     - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
                   + 4.374664141464968e+00) * q + 2.938163982698783e+00)
                 / ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
                      + 2.445134137142996e+00) * q
                     + 3.754408661907416e+00) * q + 1.0))
    q = p - 0.5
    r = q * q
    return (((((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
                 - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
               - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q)
            / (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
                  - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
                - 1.328068155288572e+01) * r + 1.0))


@njit(parallel=False, fastmath=True, cache=True)
def add_noise_kernel(out, sigma, seed, frame_index, r0, r1, c0, c1):
    """Add sigma*N(0,1) in place on the [r0:r1, c0:c1] window.

    The normal deviate is a pure function of (seed, frame_index, pixel),
    so results do not depend on threading, call order, or the window
    placement: shrinking the window to the thermally active region
    leaves every noisy pixel bit-identical to a full-frame pass.
    """
    base = _mix64(seed) ^ _mix64(frame_index + U64(0x51ED270B))
    for i in range(r0, r1):
        row = U64(i) * U64(0x9E3779B97F4A7C15)
        for j in range(c0, c1):
            key = _mix64(base ^ (row + U64(j) * U64(0x100000001B3)))
            u = (np.float64(key >> U64(11)) + 0.5) * (
                1.0 / 9007199254740992.0)
            out[i, j] += sigma * np.float32(_norm_inv(u))

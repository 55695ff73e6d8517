"""Unscented Kalman filtering with interval-constrained posteriors.

Sigma points follow the symmetric 2D+1 construction with a scalar
spread parameter kappa (default 3 - D). After a measurement update the
posterior can be moment-matched to a box-constrained Gaussian, one
dimension at a time: conditioning on a single component splits the
Gaussian into that component plus an independent remainder, so replacing
the component's moments with truncated-normal moments and propagating
through the conditional coupling is exact for a single constraint and is
the usual sequential approximation for several.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, ndtr

_JITTER = 1e-12
_SQRT_HALF = math.sqrt(0.5)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class PropagationError(RuntimeError):
    """A sigma point mapped to a non-finite value."""


class UpdateError(RuntimeError):
    """Measurement update failed (singular innovation covariance)."""


class TruncationError(RuntimeError):
    """Constraint interval holds no prior probability mass."""


@dataclass
class GaussianBelief:
    """Mean vector and covariance matrix of a Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = self.mean.shape[0]
        if self.cov.shape != (d, d):
            raise ValueError(f"covariance shape {self.cov.shape} does not "
                             f"match state dimension {d}")
        if not (np.all(np.isfinite(self.mean))
                and np.all(np.isfinite(self.cov))):
            raise ValueError("belief must be finite")
        self.cov = 0.5 * (self.cov + self.cov.T)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _belief(mean: np.ndarray, cov: np.ndarray) -> GaussianBelief:
    """Internal constructor skipping validation for trusted arrays."""
    out = object.__new__(GaussianBelief)
    out.mean = mean
    out.cov = cov
    return out


@dataclass
class SigmaSet:
    """2D+1 sigma points (rows) and their common weights."""

    points: np.ndarray
    weights: np.ndarray


@dataclass
class Bounds:
    """Componentwise interval constraints; +-inf disables a side."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise ValueError("bound vectors must have equal length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @classmethod
    def unbounded(cls, dim: int) -> "Bounds":
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @property
    def active(self) -> np.ndarray:
        return np.isfinite(self.lower) | np.isfinite(self.upper)


def sqrt_psd(mat: np.ndarray) -> np.ndarray:
    """Matrix square root L with mat ~= L @ L.T.

    Cholesky with a small diagonal jitter; falls back to a clipped
    symmetric eigendecomposition when the matrix is semi-definite.
    """
    n = mat.shape[0]
    try:
        return np.linalg.cholesky(mat + _JITTER * np.eye(n))
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
        vals = np.clip(vals, 0.0, None)
        return vecs * np.sqrt(vals)


def sigma_points(belief: GaussianBelief, kappa: float | None = None
                 ) -> SigmaSet:
    """Symmetric sigma set reproducing the belief's mean and covariance.

    Weights are kappa/(D+kappa) for the centre point and 1/(2(D+kappa))
    for the others; columns of sqrt((D+kappa) * cov) give the spread.
    """
    d = belief.dim
    if kappa is None:
        kappa = 3.0 - d
    scale = d + kappa
    if not scale > 0.0:
        raise ValueError("sigma spread requires D + kappa > 0")
    root = sqrt_psd(scale * belief.cov)
    points = np.empty((2 * d + 1, d))
    points[0] = belief.mean
    points[1:d + 1] = belief.mean + root.T
    points[d + 1:] = belief.mean - root.T
    weights = np.full(2 * d + 1, 0.5 / scale)
    weights[0] = kappa / scale
    return SigmaSet(points=points, weights=weights)


def _map_points(sigmas: SigmaSet, f, vectorized: bool) -> np.ndarray:
    if vectorized:
        ys = np.asarray(f(sigmas.points), dtype=float)
        if ys.ndim == 1:
            ys = ys[:, None]
        if not np.all(np.isfinite(ys)):
            bad = int(np.flatnonzero(~np.isfinite(ys).all(axis=1))[0])
            raise PropagationError(f"sigma point {bad} mapped to a "
                                   f"non-finite value")
        return ys
    mapped = []
    for i, point in enumerate(sigmas.points):
        y = np.atleast_1d(np.asarray(f(point), dtype=float))
        if not np.all(np.isfinite(y)):
            raise PropagationError(f"sigma point {i} mapped to a "
                                   f"non-finite value: {y}")
        mapped.append(y)
    return np.array(mapped)


def unscented_transform(sigmas: SigmaSet, f,
                        vectorized: bool = False) -> GaussianBelief:
    """Push sigma points through f and re-estimate mean and covariance.

    A vectorized f receives the whole (2D+1, D) point matrix and must
    return one row per point.
    """
    ys = _map_points(sigmas, f, vectorized)
    mean = sigmas.weights @ ys
    dev = ys - mean
    cov = (sigmas.weights * dev.T) @ dev
    return _belief(mean, 0.5 * (cov + cov.T))


def predict(belief: GaussianBelief, f, process_noise: np.ndarray,
            kappa: float | None = None,
            vectorized: bool = False) -> GaussianBelief:
    """Time update: unscented transform of f plus additive process noise."""
    out = unscented_transform(sigma_points(belief, kappa), f, vectorized)
    out.cov = out.cov + np.asarray(process_noise, dtype=float)
    return out


def update(belief: GaussianBelief, h, meas_noise: np.ndarray,
           z: np.ndarray, kappa: float | None = None,
           vectorized: bool = False) -> GaussianBelief:
    """Measurement update with measurement function h and noise cov R."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.all(np.isfinite(z)):
        raise ValueError("measurement must be finite")
    sigmas = sigma_points(belief, kappa)
    zs = _map_points(sigmas, h, vectorized)
    if zs.ndim == 1:
        zs = zs[:, None]
    z_pred = sigmas.weights @ zs
    dz = zs - z_pred
    dx = sigmas.points - belief.mean
    s_cov = (sigmas.weights * dz.T) @ dz + np.atleast_2d(
        np.asarray(meas_noise, dtype=float))
    cross = (sigmas.weights * dx.T) @ dz
    try:
        gain = np.linalg.solve(s_cov, cross.T).T
    except np.linalg.LinAlgError as exc:
        raise UpdateError("singular innovation covariance") from exc
    if not np.all(np.isfinite(gain)):
        raise UpdateError("non-finite Kalman gain")
    mean = belief.mean + gain @ (z - z_pred)
    cov = belief.cov - gain @ s_cov @ gain.T
    return _belief(mean, 0.5 * (cov + cov.T))


def _truncated_moments(c: float, d: float) -> tuple[float, float]:
    """Mean and variance of a standard normal truncated to [c, d].

    One-sided intervals use the scaled complementary error function so
    deep tails stay stable; two-sided intervals with vanishing mass raise
    TruncationError.
    """
    if c == -np.inf and d == np.inf:
        return 0.0, 1.0
    if d == np.inf:
        hazard = 1.0 / (math.sqrt(math.pi / 2.0) * erfcx(c * _SQRT_HALF))
        mean = hazard
        var = 1.0 + c * hazard - hazard * hazard
        return mean, max(var, 0.0)
    if c == -np.inf:
        mean, var = _truncated_moments(-d, np.inf)
        return -mean, var
    mass = ndtr(d) - ndtr(c)
    if mass < 1e-14:
        raise TruncationError(
            f"interval [{c:.3g}, {d:.3g}] sigma holds no prior mass")
    pdf_c = _INV_SQRT_2PI * math.exp(-0.5 * c * c)
    pdf_d = _INV_SQRT_2PI * math.exp(-0.5 * d * d)
    mean = (pdf_c - pdf_d) / mass
    var = 1.0 + (c * pdf_c - d * pdf_d) / mass - mean * mean
    return mean, max(var, 0.0)


def truncate(belief: GaussianBelief, bounds: Bounds) -> GaussianBelief:
    """Moment-match the belief to its box constraints, one dim at a time.

    Each constrained component's marginal is replaced by the moments of
    the normal truncated to [lower, upper]; the coupled change to the
    rest of the state follows the Gaussian conditional decomposition.
    The returned mean lies strictly inside every active interval.
    """
    if bounds.lower.shape[0] != belief.dim:
        raise ValueError("bounds dimension does not match belief")
    mean = belief.mean.copy()
    cov = belief.cov.copy()
    active = np.flatnonzero(bounds.active)
    # Later dimensions can nudge earlier ones back out, so sweep until
    # every constrained mean sits inside its interval (one pass almost
    # always suffices).
    for _ in range(10):
        for k in active:
            lo, up = bounds.lower[k], bounds.upper[k]
            var_k = cov[k, k]
            if var_k <= _JITTER:
                if not (lo <= mean[k] <= up):
                    raise TruncationError(
                        f"degenerate dimension {k} lies outside its bounds")
                continue
            std_k = math.sqrt(var_k)
            c = (lo - mean[k]) / std_k if np.isfinite(lo) else -np.inf
            d = (up - mean[k]) / std_k if np.isfinite(up) else np.inf
            if c < -8.5 and d > 8.5:
                # both bounds beyond 8.5 sigma: the removed mass is below
                # double precision, the moments are exactly (0, 1)
                continue
            t_mean, t_var = _truncated_moments(c, d)
            coupling = cov[:, k] / std_k
            mean = mean + coupling * t_mean
            cov = cov + np.outer(coupling, coupling) * (t_var - 1.0)
            cov = 0.5 * (cov + cov.T)
        inside = ((bounds.lower[active] <= mean[active])
                  & (mean[active] <= bounds.upper[active]))
        if inside.all():
            break
    else:
        raise TruncationError("sequential truncation failed to converge")
    return _belief(mean, cov)

"""The two online estimators: tool deflection and thermal parameters.

Deflection filter: state [tip(2), tip_vel(2), neutral(2), c_rate, d_max]
propagated by the tool-dynamics Euler step, measured by the vision tip
and the known neutral site, and truncated so the force-law parameters
stay positive. d_max estimation can be switched off, shrinking the state
to seven entries. The process model evaluates whole sigma-point blocks
at once; it shares the force formula with dynamics.step, and a
regression test pins the two paths to each other point by point.

Thermal filter: slowly varying [q_hat, c_hat, lambda_hat, rho_hat] under
a random walk, measured through the closed-form isotherm width at the
current speed, truncated to positivity boxes. Width readings below one
pixel are censored (the hull quantises to pixels), and non-finite
readings skip the update entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ToolParams, ToolState, deflection, force_magnitude
from .thermal import width_formula
from .ukf import (
    Bounds,
    GaussianBelief,
    predict,
    sigma_points,
    truncate,
    update,
)

PIXEL_WIDTH_FLOOR = 1e-3 / 4.81  # one pixel, metres


class FilterDivergenceError(RuntimeError):
    """Posterior covariance grew past the configured ceiling."""


@dataclass
class DeflectionFilterConfig:
    tool: ToolParams
    process_noise: np.ndarray
    meas_noise: np.ndarray
    bounds: Bounds
    estimate_d_max: bool = True
    kappa: float = 0.0
    divergence_trace: float = 1e4

    @property
    def dim(self) -> int:
        return 8 if self.estimate_d_max else 7


class DeflectionFilter:
    """Tracks the tool state and force-law parameters from tip sightings."""

    def __init__(self, config: DeflectionFilterConfig,
                 initial: GaussianBelief):
        if initial.dim != config.dim:
            raise ValueError(f"initial belief must have dimension "
                             f"{config.dim}")
        self.config = config
        self.belief = initial

    def _process(self, u: float, dt: float):
        cfg = self.config
        lo, up = cfg.bounds.lower, cfg.bounds.upper
        c_lo, c_up = max(lo[6], 1e-6), up[6]
        tool = cfg.tool

        def f(points: np.ndarray) -> np.ndarray:
            x = np.atleast_2d(points)
            c_rate = np.clip(x[:, 6], c_lo, c_up)
            if cfg.estimate_d_max:
                d_max = np.clip(x[:, 7], max(lo[7], 1e-6), up[7])
            else:
                d_max = tool.d_max
            f_cut = force_magnitude(u, d_max, c_rate)
            out = x.copy()
            out[:, 0:2] += dt * x[:, 2:4]
            out[:, 2] += dt / tool.mass * (
                -tool.stiffness * (x[:, 0] - x[:, 4]) + f_cut)
            out[:, 3] += dt / tool.mass * (
                -tool.stiffness * (x[:, 1] - x[:, 5]))
            return out if points.ndim == 2 else out[0]
        return f

    @staticmethod
    def _measure(points: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(points)
        out = x[:, (0, 1, 4, 5)]
        return out if points.ndim == 2 else out[0]

    _MEAS_IDX = (0, 1, 4, 5)

    def _linear_update(self, belief: GaussianBelief,
                       z: np.ndarray) -> GaussianBelief:
        """Measurement update for the linear selection z = [tip, neutral].

        The unscented update is exact for linear measurement maps, so
        this is the same posterior as ukf.update with _measure, computed
        without sigma points (pinned by a regression test).
        """
        idx = list(self._MEAS_IDX)
        cov = belief.cov
        s_cov = cov[np.ix_(idx, idx)] + self.config.meas_noise
        cross = cov[:, idx]
        try:
            gain = np.linalg.solve(s_cov, cross.T).T
        except np.linalg.LinAlgError as exc:
            raise UpdateError("singular innovation covariance") from exc
        mean = belief.mean + gain @ (z - belief.mean[idx])
        post = cov - gain @ s_cov @ gain.T
        return GaussianBelief(mean, 0.5 * (post + post.T))

    def step(self, u: float, z, dt: float) -> tuple[ToolState, float]:
        """Predict, (optionally) update with z = [tip, neutral], truncate.

        z is a 4-vector in metres or None for a predict-only tick (no
        detection). Returns the posterior mean as a ToolState plus the
        estimated deflection.
        """
        cfg = self.config
        belief = predict(self.belief, self._process(u, dt),
                         cfg.process_noise, cfg.kappa, vectorized=True)
        if z is not None:
            belief = self._linear_update(belief, np.asarray(z, dtype=float))
            belief = truncate(belief, cfg.bounds)
        trace = float(np.trace(belief.cov))
        if not np.isfinite(trace) or trace > cfg.divergence_trace:
            raise FilterDivergenceError(
                f"covariance trace {trace:.3g} exceeds ceiling")
        self.belief = belief
        state = ToolState(tip=belief.mean[0:2], tip_vel=belief.mean[2:4],
                          neutral=belief.mean[4:6],
                          c_rate_hat=float(belief.mean[6]))
        return state, deflection(state)

    @property
    def c_rate_hat(self) -> float:
        return float(self.belief.mean[6])

    @property
    def d_max_hat(self) -> float:
        if self.config.estimate_d_max:
            return float(self.belief.mean[7])
        return self.config.tool.d_max


@dataclass
class ThermalFilterConfig:
    prior: GaussianBelief            # over [q_hat, c_hat, lambda, rho]
    process_noise: np.ndarray
    meas_noise: float                # width variance, m^2
    bounds: Bounds
    depth: float
    ambient: float = 20.0
    isotherm: float = 60.0
    width_floor: float = PIXEL_WIDTH_FLOOR
    kappa: float = 0.0
    divergence_trace: float = 1e12

    def __post_init__(self) -> None:
        if self.prior.dim != 4:
            raise ValueError("thermal filter state is 4-dimensional")
        inside = ((self.bounds.lower <= self.prior.mean)
                  & (self.prior.mean <= self.bounds.upper))
        if not inside.all():
            raise ValueError("prior mean must lie inside the bounds")


class ThermalParameterFilter:
    """Random-walk filter over source and tissue constants, driven by
    measured isotherm widths."""

    def __init__(self, config: ThermalFilterConfig):
        self.config = config
        self.belief = GaussianBelief(config.prior.mean.copy(),
                                     config.prior.cov.copy())

    def _width_batch(self, u: float):
        cfg = self.config
        lo = np.maximum(cfg.bounds.lower, 1e-9)
        up = cfg.bounds.upper
        delta_t = cfg.isotherm - cfg.ambient

        def h(points: np.ndarray) -> np.ndarray:
            theta = np.clip(np.atleast_2d(points), lo, up)
            w = width_formula(u, theta[:, 0], theta[:, 2], theta[:, 3],
                              theta[:, 1], delta_t)
            return w if points.ndim == 2 else float(w[0])
        return h

    def predict_width(self, u: float) -> float:
        """Width the current estimates imply at speed u."""
        if not u > 0.0:
            raise ValueError("predict_width requires u > 0")
        return float(self._width_batch(u)(self.belief.mean))

    _INNOVATION_GATE = 3.5

    def _gated_update(self, belief: GaussianBelief, h,
                      width_meas: float) -> GaussianBelief:
        """Scalar unscented update with innovation gating.

        Step disturbances produce width innovations tens of sigma wide;
        without a gate a single update flings the parameters far past
        their feasible box. The measurement variance is inflated so one
        tick moves the estimate at most ~3.5 sigma of the predicted
        innovation, making adaptation take a handful of frames instead
        of one violent jump. With the gate inactive this is exactly
        ukf.update for the scalar measurement (regression-tested).
        """
        cfg = self.config
        sigmas = sigma_points(belief, cfg.kappa)
        ws = np.asarray(h(sigmas.points), dtype=float)
        z_pred = float(sigmas.weights @ ws)
        dz = ws - z_pred
        p_zz = float(sigmas.weights @ (dz * dz))
        innovation = width_meas - z_pred
        needed = (innovation / self._INNOVATION_GATE) ** 2 - p_zz
        meas_var = max(cfg.meas_noise, needed)
        s_cov = p_zz + meas_var
        if not (np.isfinite(s_cov) and s_cov > 0.0):
            raise UpdateError("singular innovation covariance")
        cross = (sigmas.weights * dz) @ (sigmas.points - belief.mean)
        gain = cross / s_cov
        mean = belief.mean + gain * innovation
        post = belief.cov - np.outer(gain, gain) * s_cov
        return GaussianBelief(mean, 0.5 * (post + post.T))

    def step(self, u: float, width_meas: float, dt: float) -> np.ndarray:
        """One filter tick; returns the posterior [q, c, lambda, rho].

        The process is an identity random walk (the unscented transform
        of the identity is the identity, so the time update reduces to
        adding the process noise), and dt only matters through the
        configured per-tick noise. Censored (sub-pixel) and non-finite
        widths run the predict stage only.
        """
        cfg = self.config
        belief = GaussianBelief(self.belief.mean,
                                self.belief.cov + cfg.process_noise)
        usable = (np.isfinite(width_meas)
                  and width_meas >= cfg.width_floor and u > 0.0)
        if usable:
            belief = self._gated_update(belief, self._width_batch(u),
                                        width_meas)
            belief = truncate(belief, cfg.bounds)
        trace = float(np.trace(belief.cov))
        if not np.isfinite(trace) or trace > cfg.divergence_trace:
            raise FilterDivergenceError(
                f"covariance trace {trace:.3g} exceeds ceiling")
        self.belief = belief
        return belief.mean.copy()

    @property
    def estimates(self) -> np.ndarray:
        return self.belief.mean.copy()

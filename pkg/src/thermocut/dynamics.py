"""Tool-tip mechanics: spring-coupled tip with a velocity-dependent drag.

The tip is a point mass on a spring anchored at the neutral (carriage)
position. Cutting drags the tip against travel with magnitude growing
toward d_max as speed rises:

    F(u) = -d_max * exp(-c_rate / u)

State propagation is a single forward-Euler step; the estimator uses the
same force formula and Euler update as its process model (pinned to this
implementation by a regression test), so simulator and filter share one
model. The neutral position and the force-rate state are carried
unchanged (their dynamics live in the filter's process noise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ToolParams:
    """Effective tip mass, mount stiffness, and force-law constants."""

    mass: float          # kg
    stiffness: float     # N/m
    d_max: float         # N, saturation force magnitude
    c_rate: float        # m/s, velocity scale of force growth

    def __post_init__(self) -> None:
        for name in ("mass", "stiffness", "d_max", "c_rate"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class ToolState:
    """Tip position/velocity, neutral position, and force-rate estimate.

    All positions are 2-vectors (metres) in the carriage frame; the first
    component points along travel.
    """

    tip: np.ndarray = field(default_factory=lambda: np.zeros(2))
    tip_vel: np.ndarray = field(default_factory=lambda: np.zeros(2))
    neutral: np.ndarray = field(default_factory=lambda: np.zeros(2))
    c_rate_hat: float = 0.0

    def __post_init__(self) -> None:
        if not (isinstance(self.tip, np.ndarray)
                and self.tip.dtype == np.float64):
            self.tip = np.asarray(self.tip, dtype=float)
        if not (isinstance(self.tip_vel, np.ndarray)
                and self.tip_vel.dtype == np.float64):
            self.tip_vel = np.asarray(self.tip_vel, dtype=float)
        if not (isinstance(self.neutral, np.ndarray)
                and self.neutral.dtype == np.float64):
            self.neutral = np.asarray(self.neutral, dtype=float)


def force_magnitude(u, d_max, c_rate):
    """Signed cutting force -d_max*exp(-c_rate/u); 0 at u = 0.

    Vectorised over any of the arguments. This is the single force
    formula shared by the simulator, the standalone cutting_force
    operation, and the filter process model.
    """
    if (isinstance(u, float) and isinstance(d_max, float)
            and isinstance(c_rate, float)):
        return -d_max * math.exp(-c_rate / u) if u > 0.0 else 0.0
    u_arr = np.asarray(u, dtype=float)
    out = np.where(u_arr > 0.0,
                   -np.asarray(d_max) * np.exp(
                       -np.asarray(c_rate)
                       / np.where(u_arr > 0.0, u_arr, 1.0)),
                   0.0)
    return float(out) if out.ndim == 0 else out


def cutting_force(u: float, p: ToolParams) -> float:
    """Cutting force at commanded speed u using the tool's constants."""
    if u < 0.0:
        raise ValueError("cutting force is defined for u >= 0")
    return force_magnitude(u, p.d_max, p.c_rate)


def step(state: ToolState, u: float, dt: float, p: ToolParams) -> ToolState:
    """One forward-Euler step of the tip dynamics.

    tip     += dt * tip_vel
    tip_vel += dt/m * (-k*(tip - neutral) + [F(u), 0])
    neutral and c_rate_hat pass through unchanged. The force rate comes
    from the state (so the same step serves as the filter process model);
    the magnitude comes from the params.
    """
    if not dt > 0.0:
        raise ValueError("step requires dt > 0")
    f_cut = force_magnitude(float(u), p.d_max, state.c_rate_hat)
    tip, vel, neutral = state.tip, state.tip_vel, state.neutral
    accel_x = (-p.stiffness * (tip[0] - neutral[0]) + f_cut) / p.mass
    accel_y = -p.stiffness * (tip[1] - neutral[1]) / p.mass
    return ToolState(
        tip=np.array([tip[0] + dt * vel[0], tip[1] + dt * vel[1]]),
        tip_vel=np.array([vel[0] + dt * accel_x, vel[1] + dt * accel_y]),
        neutral=neutral,
        c_rate_hat=state.c_rate_hat,
    )


def deflection(state: ToolState) -> float:
    """Euclidean distance between the tip and its neutral position."""
    return float(np.linalg.norm(state.tip - state.neutral))

"""Per-tick choice of cut velocity by bounded scalar minimisation.

The cost trades cutting force against isotherm width, with small
penalties on command changes and on dawdling below the reference rate:

    J(v) = a*F(v)^2 + b*w(v)^2 + c*(v - v_prev)^2 + r*slack(v)^2,
    slack(v) = min(v - v_ref, 0).

The weights follow the clinical unit convention in which forces are
newtons, widths millimetres, and velocities millimetres per second; at
surgical operating points all four terms are then O(1) and the stock
weights (a=b=1, c=r=1e-3) balance force against width as intended. The
public API still speaks SI; conversion happens inside cost().

The slack term is squared by default so slowing down is penalised, never
rewarded; the historical linear form is available via slack_form for
comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

_INV_PHI = (sqrt(5.0) - 1.0) / 2.0
_COARSE_POINTS = 241


class OptimizationError(RuntimeError):
    """No finite cost anywhere on the feasible interval."""


@dataclass(frozen=True)
class CostWeights:
    """Penalty weights and velocity limits for the cut-rate cost."""

    a: float = 1.0          # force weight (per N^2)
    b: float = 1.0          # width weight (per mm^2)
    c: float = 0.001        # command-change weight (per (mm/s)^2)
    r: float = 0.001        # slow-down weight (per (mm/s)^2)
    v_ref: float = 0.007    # m/s, reference surgeon rate
    v_min: float = 0.0005   # m/s
    v_max: float = 0.015    # m/s
    slack_form: str = "squared"  # or "linear" (historical)

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "r"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"weight {name} must be non-negative")
        if not 0.0 < self.v_min < self.v_max:
            raise ValueError("need 0 < v_min < v_max")
        if not self.v_min <= self.v_ref <= self.v_max:
            raise ValueError("v_ref must lie within [v_min, v_max]")
        if self.slack_form not in ("squared", "linear"):
            raise ValueError("slack_form must be 'squared' or 'linear'")


def cost(v, v_prev: float, w: CostWeights, force_model, width_model):
    """Cut-rate cost at velocity v (SI inputs, see module docstring).

    force_model maps velocity (m/s) to force (N); width_model maps
    velocity to isotherm width (m). Vectorised over v.
    """
    if isinstance(v, float):
        try:
            force = float(force_model(v))
            width = float(width_model(v))
        except Exception as exc:
            raise OptimizationError(
                f"model evaluation failed at v={v}") from exc
        dv_mm = (v - v_prev) * 1e3
        slack_mm = min((v - w.v_ref) * 1e3, 0.0)
        slack_term = (w.r * slack_mm if w.slack_form == "linear"
                      else w.r * slack_mm * slack_mm)
        return (w.a * force * force + w.b * (width * 1e3) ** 2
                + w.c * dv_mm * dv_mm + slack_term)
    v_arr = np.asarray(v, dtype=float)
    try:
        force = np.asarray(force_model(v_arr), dtype=float)
        width = np.asarray(width_model(v_arr), dtype=float)
    except Exception as exc:
        raise OptimizationError(f"model evaluation failed at v={v}") from exc
    dv_mm = (v_arr - v_prev) * 1e3
    slack_mm = np.minimum((v_arr - w.v_ref) * 1e3, 0.0)
    slack_term = (w.r * slack_mm if w.slack_form == "linear"
                  else w.r * slack_mm ** 2)
    out = (w.a * force ** 2 + w.b * (width * 1e3) ** 2
           + w.c * dv_mm ** 2 + slack_term)
    return float(out) if out.ndim == 0 else out


def golden_section(f, lo: float, hi: float, tol: float = 1e-9,
                   max_iter: int = 200) -> float:
    """Argmin of a unimodal f on [lo, hi] to interval width tol."""
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    x1 = b - _INV_PHI * h
    x2 = a + _INV_PHI * h
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def optimize_velocity(v_prev: float, w: CostWeights, force_model,
                      width_model) -> float:
    """Velocity in [v_min, v_max] minimising the cut-rate cost.

    A coarse scan brackets the global minimum (the cost need not be
    unimodal end to end), then golden-section search refines the best
    bracket. Deterministic for fixed inputs.
    """
    grid = np.linspace(w.v_min, w.v_max, _COARSE_POINTS)
    extras = [v for v in (v_prev, w.v_ref) if w.v_min <= v <= w.v_max]
    if extras:
        grid = np.unique(np.concatenate([grid, np.asarray(extras)]))
    values = cost(grid, v_prev, w, force_model, width_model)
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    if not finite.any():
        raise OptimizationError("cost is non-finite across the interval")
    values = np.where(finite, values, np.inf)
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]

    def scalar_cost(v: float) -> float:
        val = cost(v, v_prev, w, force_model, width_model)
        return val if np.isfinite(val) else np.inf

    refined = golden_section(scalar_cost, lo, hi,
                             tol=1e-7 * (w.v_max - w.v_min))
    candidates = [refined, grid[best], w.v_min, w.v_max]
    costs = [scalar_cost(v) for v in candidates]
    return float(candidates[int(np.argmin(costs))])

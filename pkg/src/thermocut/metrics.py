"""Trial metrics: disturbance rejection, success rate, summaries."""

from __future__ import annotations

import numpy as np

from .phantom import RAISED_INDICES, PhantomProfile
from .trial import TrialResult

STEP_WINDOW = 0.010  # m of travel before/after each step boundary


class MetricError(ValueError):
    """A metric was asked for on an empty window or result set."""


def disturbance_rejection(times: np.ndarray, values: np.ndarray,
                          pre_window: tuple[float, float],
                          dist_window: tuple[float, float],
                          disturbance_mag: float) -> float:
    """(mean during disturbance - mean before) / disturbance magnitude.

    Windows are half-open [t0, t1) intervals on the first axis (time or
    position, as long as both windows use the same axis).
    """
    if not disturbance_mag > 0.0:
        raise MetricError("disturbance magnitude must be positive")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    pre = values[(times >= pre_window[0]) & (times < pre_window[1])]
    dist = values[(times >= dist_window[0]) & (times < dist_window[1])]
    if pre.size == 0 or dist.size == 0:
        raise MetricError("empty disturbance-rejection window")
    return float((dist.mean() - pre.mean()) / disturbance_mag)


def success_rate(results: list[TrialResult]) -> float:
    if not results:
        raise MetricError("success rate of an empty result list")
    return sum(1.0 for r in results if r.success) / len(results)


def step_boundaries(profile: PhantomProfile) -> list[float]:
    """Cut positions where a raised segment begins."""
    if profile.step_height == 0.0:
        return []
    return [i * profile.segment_length for i in RAISED_INDICES]


def step_rejection_ratios(result: TrialResult, profile: PhantomProfile
                          ) -> dict[str, float]:
    """Mean deflection/width rejection ratios over the step boundaries.

    Uses the default 10 mm of travel before/after each boundary; steps
    the trial never reached are skipped. Flat phantoms yield NaNs.
    """
    out = {"d_deflection": float("nan"), "d_width": float("nan")}
    boundaries = step_boundaries(profile)
    if not boundaries:
        return out
    pos = result.traces["position"]
    ratios: dict[str, list[float]] = {"d_deflection": [], "d_width": []}
    for boundary in boundaries:
        pre = (boundary - STEP_WINDOW, boundary)
        dist = (boundary, boundary + STEP_WINDOW)
        for key, column in (("d_deflection", "deflection_true"),
                            ("d_width", "width_meas")):
            try:
                ratios[key].append(disturbance_rejection(
                    pos, result.traces[column], pre, dist,
                    profile.step_height))
            except MetricError:
                continue
    for key, vals in ratios.items():
        if vals:
            out[key] = float(np.mean(vals))
    return out


def summarize_trial(result: TrialResult, profile: PhantomProfile
                    ) -> dict[str, float]:
    """Scalar per-trial metrics for the matrix summary table."""
    traces = result.traces
    n = traces["t"].size
    summary = {
        "success": 1.0 if result.success else 0.0,
        "failure_position": (result.failure_position
                             if result.failure_position is not None
                             else float("nan")),
        "peak_deflection": result.peak_deflection,
        "mean_deflection": float(traces["deflection_true"].mean())
        if n else 0.0,
        "mean_width": float(traces["width_meas"].mean()) if n else 0.0,
        "mean_velocity": float(traces["v_cmd"].mean()) if n else 0.0,
        "duration": float(traces["t"][-1]) if n else 0.0,
    }
    summary.update(step_rejection_ratios(result, profile))
    return summary

"""Cost arithmetic and optimizer-vs-grid agreement."""

import numpy as np
import pytest

from thermocut.optimizer import (
    CostWeights,
    OptimizationError,
    cost,
    golden_section,
    optimize_velocity,
)


def grid_argmin(v_prev, w, force_model, width_model, n=100_000):
    grid = np.linspace(w.v_min, w.v_max, n)
    vals = cost(grid, v_prev, w, force_model, width_model)
    return float(grid[int(np.argmin(vals))])


def toy_models():
    # force grows toward 2 N, width falls like 1/v around millimetre scale
    force = lambda v: 2.0 * np.exp(-0.01 / np.maximum(v, 1e-12))
    width = lambda v: 1.5e-5 / np.maximum(v, 1e-12)
    return force, width


def test_cost_hand_arithmetic():
    w = CostWeights(a=1.0, b=1.0, c=0.001, r=0.001, v_ref=0.007)
    force = lambda v: np.asarray(v, dtype=float)       # F(v) = v
    width = lambda v: 1.0 / np.asarray(v, dtype=float)  # w(v) = 1/v
    v, v_prev = 0.004, 0.006
    expected = (1.0 * v ** 2
                + 1.0 * (1e3 / v) ** 2
                + 0.001 * (1e3 * (v - v_prev)) ** 2
                + 0.001 * (1e3 * min(v - 0.007, 0.0)) ** 2)
    assert cost(v, v_prev, w, force, width) == pytest.approx(expected,
                                                             rel=1e-12)


def test_cost_trivial_zero_terms():
    w = CostWeights()
    force, width = toy_models()
    v = 0.009  # above v_ref, equal to v_prev
    j = cost(v, v, w, force, width)
    expected = w.a * force(v) ** 2 + w.b * (width(v) * 1e3) ** 2
    assert j == pytest.approx(expected, rel=1e-12)


def test_linear_slack_form_available():
    w = CostWeights(slack_form="linear")
    force, width = toy_models()
    v, v_prev = 0.004, 0.004
    j_sq = cost(v, v_prev, CostWeights(), force, width)
    j_lin = cost(v, v_prev, w, force, width)
    slack_mm = (v - w.v_ref) * 1e3
    assert j_lin - j_sq == pytest.approx(
        w.r * slack_mm - w.r * slack_mm ** 2, rel=1e-9)


def test_weights_validation():
    with pytest.raises(ValueError):
        CostWeights(a=-1.0)
    with pytest.raises(ValueError):
        CostWeights(v_min=0.01, v_max=0.005)
    with pytest.raises(ValueError):
        CostWeights(v_ref=0.5)
    with pytest.raises(ValueError):
        CostWeights(slack_form="cubic")


def test_golden_section_quadratic():
    assert golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0,
                          tol=1e-10) == pytest.approx(0.3, abs=1e-8)


def test_large_move_penalty_pins_to_previous():
    w = CostWeights(c=1e9)
    force, width = toy_models()
    v_prev = 0.0063
    out = optimize_velocity(v_prev, w, force, width)
    assert out == pytest.approx(v_prev, abs=1e-6)


def test_monotone_force_only_goes_to_lower_bound():
    w = CostWeights(b=0.0, c=0.0, r=0.0)
    force, _ = toy_models()
    out = optimize_velocity(0.007, w, force, lambda v: 0.0 * np.asarray(v))
    assert out == pytest.approx(w.v_min, abs=1e-7)


def test_grid_agreement_random_states():
    rng = np.random.default_rng(99)
    w = CostWeights()
    tol = 1e-4 * (w.v_max - w.v_min)
    for _ in range(40):
        d_hat = rng.uniform(0.5, 60.0)
        c_hat = rng.uniform(0.004, 0.04)
        k_w = rng.uniform(5e-6, 4e-5)
        v_prev = rng.uniform(w.v_min, w.v_max)
        force = lambda v: d_hat * np.exp(-c_hat / np.maximum(v, 1e-12))
        width = lambda v: k_w / np.maximum(v, 1e-12)
        out = optimize_velocity(v_prev, w, force, width)
        ref = grid_argmin(v_prev, w, force, width)
        assert abs(out - ref) <= tol
        assert w.v_min <= out <= w.v_max


def test_interior_minimum_not_pinned_to_bounds():
    w = CostWeights(c=0.0, r=0.0)
    force = lambda v: 30.0 * np.exp(-0.02 / np.maximum(v, 1e-12))
    width = lambda v: 1.5e-5 / np.maximum(v, 1e-12)
    out = optimize_velocity(0.007, w, force, width)
    ref = grid_argmin(0.007, w, force, width)
    assert w.v_min < out < w.v_max
    assert abs(out - ref) <= 1e-4 * (w.v_max - w.v_min)


def test_common_scaling_leaves_argmin():
    force = lambda v: 10.0 * np.exp(-0.015 / np.maximum(v, 1e-12))
    width = lambda v: 2e-5 / np.maximum(v, 1e-12)
    w1 = CostWeights(a=1.0, b=1.0, c=0.0, r=0.0)
    w2 = CostWeights(a=7.0, b=7.0, c=0.0, r=0.0)
    out1 = optimize_velocity(0.007, w1, force, width)
    out2 = optimize_velocity(0.007, w2, force, width)
    assert out1 == pytest.approx(out2, abs=1e-7)


def test_nonfinite_models_raise():
    w = CostWeights()
    bad = lambda v: np.full_like(np.asarray(v, dtype=float), np.nan)
    with pytest.raises(OptimizationError):
        optimize_velocity(0.007, w, bad, bad)

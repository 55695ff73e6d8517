"""K0 accuracy against an integral-representation oracle."""

import numpy as np
import pytest
from scipy.integrate import quad

from thermocut.bessel import EULER_GAMMA, k0, k0e


def k0_quadrature(x: float) -> float:
    """Oracle: K0(x) = integral_0^inf exp(-x cosh t) dt."""
    upper = np.arccosh(745.0 / x) if x < 745.0 else 1.0
    val, _ = quad(lambda t: np.exp(-x * np.cosh(t)), 0.0, upper,
                  limit=200, epsabs=0.0, epsrel=1e-13)
    return val


def test_reference_point():
    assert k0(1.0) == pytest.approx(0.42102443824070834, rel=1e-12, abs=0.0)


def test_quadrature_oracle_grid():
    xs = np.logspace(-4, np.log10(50.0), 60)
    vals = k0(xs)
    for x, v in zip(xs, vals):
        exact = k0_quadrature(float(x))
        assert abs(v - exact) / exact < 1e-10


def test_small_argument_log_asymptote():
    x = 1e-4
    asym = -np.log(x / 2.0) - EULER_GAMMA
    assert abs(k0(x) - asym) / asym < 1e-6


def test_monotone_decreasing_and_positive():
    xs = np.logspace(-4, np.log10(50.0), 400)
    vals = k0(xs)
    assert np.all(vals > 0.0)
    assert np.all(np.diff(vals) < 0.0)
    assert k0(2.0) < k0(1.0)


def test_scaled_variant_consistent():
    xs = np.array([0.01, 0.5, 1.9, 2.0, 2.1, 10.0, 40.0])
    np.testing.assert_allclose(k0e(xs), k0(xs) * np.exp(xs), rtol=1e-12)


def test_domain_errors():
    for bad in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(ValueError):
            k0(bad)
    with pytest.raises(ValueError):
        k0(np.array([1.0, -2.0]))

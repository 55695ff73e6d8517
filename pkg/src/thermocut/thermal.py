"""Moving-heat-source temperature field and isotherm-width models.

The planar conduction field around a tool travelling at speed u is the
classical steady solution in the co-moving frame,

    T(xi, y) = T_amb + A * exp(-u*xi / (2*alpha)) * K0(u*r / (2*alpha)),

with r = sqrt(xi^2 + y^2). The amplitude A is q_hat/(2*pi*conductivity)
for a constant-power source delivering q_hat watts per metre of cut
depth; an explicit source_strength S may be supplied instead, in which
case A = S*u/(2*pi*conductivity) is used literally (S then carries the
unusual J/m^2 units that form of the boundary condition implies).

The closed-form width model predicts the lateral extent of the chosen
isotherm directly from the same parameters; see isotherm_width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import k0e

TWO_PI = 2.0 * math.pi

# Human tongue values from the tissue-properties literature, used by the
# sensor-bandwidth example below. The published time constant for the
# 1 mm^3 example block is 1254.4 s; direct evaluation of
# rho*c_p*V/(h*A_s) with the same constants gives ~1242.96 s (about 0.9%
# lower). Both numbers are kept so reports can surface the gap.
TONGUE_DENSITY = 1090.0          # kg/m^3
TONGUE_SPECIFIC_HEAT = 3421.0    # J/(kg K)
TONGUE_HEAT_TRANSFER = 3.0       # W/(m^2 K)
TONGUE_TIME_CONSTANT_PUBLISHED = 1254.4  # s


@dataclass(frozen=True)
class ThermalParams:
    """Material and source constants for one tissue region.

    conductivity  W/(m K)
    density       kg/m^3
    specific_heat J/(kg K)
    ambient       deg C, far-field temperature
    isotherm      deg C, temperature whose contour width we track
    linear_power  W/m, source power per metre of cut depth (q_hat)
    depth         m, depth of cut
    source_strength  optional explicit field-source constant; None means
                     the constant-power coupling (see module docstring)
    """

    conductivity: float
    density: float
    specific_heat: float
    ambient: float
    isotherm: float
    linear_power: float
    depth: float
    source_strength: float | None = None

    def __post_init__(self) -> None:
        for name in ("conductivity", "density", "specific_heat",
                     "linear_power", "depth"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.isotherm > self.ambient:
            raise ValueError("isotherm temperature must exceed ambient")

    @property
    def diffusivity(self) -> float:
        """Thermal diffusivity, conductivity/(density*specific_heat)."""
        return self.conductivity / (self.density * self.specific_heat)

    @property
    def t_star(self) -> float:
        """Dimensionless isotherm temperature.

        2*pi*conductivity*depth*(isotherm - ambient) / q with
        q = linear_power*depth; the depth cancels.
        """
        return (TWO_PI * self.conductivity * (self.isotherm - self.ambient)
                / self.linear_power)


@dataclass(frozen=True)
class SensorModel:
    """First-order radiometric sensor: time constant, noise, accuracy."""

    tau: float
    noise_sigma: float = 0.0
    max_error: float = 0.0

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise ValueError("sensor time constant must be positive")
        if self.noise_sigma < 0.0:
            raise ValueError("noise sigma must be non-negative")


def temperature_at(xi, y, u: float, p: ThermalParams):
    """Steady co-moving temperature at offset (xi, y) from the source.

    xi is measured along travel (positive ahead of the source), y across
    it. Accepts scalars or arrays. Raises ValueError at the source point
    where the field diverges, and for u <= 0 where no steady solution
    exists.
    """
    if not u > 0.0:
        raise ValueError("temperature_at requires u > 0")
    xi_arr = np.asarray(xi, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    r = np.hypot(xi_arr, y_arr)
    if np.any(r == 0.0):
        raise ValueError("temperature field is singular at the source")
    scale = u / (2.0 * p.diffusivity)
    if p.source_strength is None:
        amp = p.linear_power / (TWO_PI * p.conductivity)
    else:
        amp = p.source_strength * u / (TWO_PI * p.conductivity)
    rs = scale * r
    out = p.ambient + amp * np.exp(-scale * xi_arr - rs) * k0e(rs)
    return float(out) if out.ndim == 0 else out


def correction_factor(t_star):
    """Width-model correction exp(-1/T*) * [1 + (1.477 T*)^1.407]^0.7107."""
    t_arr = np.asarray(t_star, dtype=float)
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr <= 0.0):
        raise ValueError("correction factor requires t_star > 0")
    out = np.exp(-1.0 / t_arr) * (
        1.0 + (1.477 * t_arr) ** 1.407) ** 0.7107
    return float(out) if out.ndim == 0 else out


def width_formula(u, linear_power, conductivity, density, specific_heat,
                  delta_t):
    """Vectorised isotherm-width closed form (see isotherm_width).

    All array arguments broadcast; depth cancels out of the expression,
    entering only through linear_power = q/depth.
    """
    diffusivity = conductivity / (density * specific_heat)
    t_star = TWO_PI * conductivity * delta_t / linear_power
    prefactor = linear_power * diffusivity / (
        math.sqrt(TWO_PI * math.e) * u * conductivity * delta_t)
    return prefactor * correction_factor(t_star)


def isotherm_width(u: float, p: ThermalParams) -> float:
    """Closed-form lateral extent of the isotherm contour at speed u.

    w(u) = q*alpha / (sqrt(2 pi e) * u * conductivity * depth * dT) * f(T*)
    with q = linear_power*depth. Strictly positive and proportional
    to 1/u.
    """
    if not u > 0.0:
        raise ValueError("isotherm width requires u > 0")
    return float(width_formula(u, p.linear_power, p.conductivity,
                               p.density, p.specific_heat,
                               p.isotherm - p.ambient))


def sensor_step(t_meas_prev: float, t_true: float, dt: float,
                sensor: SensorModel):
    """Exact one-step update of the first-order sensor lag.

    Solves dT/dt = (T_true - T)/tau over dt with T_true held constant:
    the reading relaxes toward the scene temperature with factor
    exp(-dt/tau). Accepts arrays for the temperatures.
    """
    if not dt > 0.0:
        raise ValueError("sensor_step requires dt > 0")
    decay = math.exp(-dt / sensor.tau)
    return t_true + (t_meas_prev - t_true) * decay


def tissue_time_constant(rho: float, c_p: float, volume: float,
                         h: float, surface: float) -> float:
    """Lumped thermal time constant rho*c_p*V / (h*A_s) of a tissue block."""
    for name, v in (("rho", rho), ("c_p", c_p), ("volume", volume),
                    ("h", h), ("surface", surface)):
        if not v > 0.0:
            raise ValueError(f"{name} must be positive")
    return rho * c_p * volume / (h * surface)

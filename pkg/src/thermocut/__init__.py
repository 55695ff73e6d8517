"""Desk-scale simulator of thermography-driven velocity control for
energy-based tissue cutting: thermal field model, tool dynamics,
constrained unscented filtering, per-tick velocity optimisation, and a
stepped-phantom trial harness."""

from .bessel import k0, k0e
from .camera import CameraModel, ThermalFrame, render_frame, write_pgm
from .dynamics import ToolParams, ToolState, cutting_force, deflection, step
from .estimators import (
    DeflectionFilter,
    DeflectionFilterConfig,
    FilterDivergenceError,
    ThermalFilterConfig,
    ThermalParameterFilter,
)
from .optimizer import CostWeights, cost, optimize_velocity
from .phantom import PhantomProfile, SegmentParams, params_at, stepped_profile
from .thermal import (
    SensorModel,
    ThermalParams,
    correction_factor,
    isotherm_width,
    sensor_step,
    temperature_at,
    tissue_time_constant,
)
from .trial import SimSettings, TrialConfig, TrialResult, run_trial
from .ukf import (
    Bounds,
    GaussianBelief,
    SigmaSet,
    predict,
    sigma_points,
    truncate,
    unscented_transform,
    update,
)
from .vision import NoDetectionError, convex_hull, estimate_tip, measure_width

__version__ = "0.1.0"

"""YAML scenario/suite loading and validation.

Scenario files say what to run (controller, phantom, seeds, weights);
the calibration file holds the simulator's physical constants and filter
tuning in one place. Anything structurally wrong raises ConfigError,
which the CLI maps to exit code 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .camera import CameraModel
from .dynamics import ToolParams
from .optimizer import CostWeights
from .phantom import PhantomProfile, stepped_profile
from .thermal import SensorModel, ThermalParams
from .trial import FilterTuning, SimSettings, TrialConfig

PHANTOM_NAMES = ("flat", "step2", "step3")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


@dataclass
class Calibration:
    """Simulator calibration constants (not measured data)."""

    tissue: ThermalParams
    tool: ToolParams
    step_scales: dict[float, float]
    sim: SimSettings
    tuning: FilterTuning = field(default_factory=FilterTuning)

    def phantom(self, name: str) -> PhantomProfile:
        if name == "flat":
            return stepped_profile(self.tissue, 0.0, 1.0)
        if name == "step2":
            return stepped_profile(self.tissue, 0.002,
                                   self.step_scales[0.002])
        if name == "step3":
            return stepped_profile(self.tissue, 0.003,
                                   self.step_scales[0.003])
        raise ConfigError(f"unknown phantom '{name}' "
                          f"(expected one of {PHANTOM_NAMES})")


@dataclass
class CellSpec:
    """One controller column of the trial matrix."""

    name: str
    controller: str
    velocity: float = 0.007


@dataclass
class SuiteConfig:
    cells: list[CellSpec]
    phantoms: list[str]
    seeds: list[int]
    calibration: Calibration
    weights: CostWeights
    cut_length: float = 0.2
    failure_deflection: float = 0.010

    def trial_config(self, cell: CellSpec, phantom_name: str,
                     seed: int) -> TrialConfig:
        return TrialConfig(
            controller=cell.controller,
            velocity=cell.velocity,
            phantom=self.calibration.phantom(phantom_name),
            tool=self.calibration.tool,
            weights=self.weights,
            sim=self.calibration.sim,
            tuning=self.calibration.tuning,
            cut_length=self.cut_length,
            failure_deflection=self.failure_deflection,
            seed=seed,
        )


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"missing key '{key}' in {context}")
    return mapping[key]


def _load_yaml(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping")
    return data


def load_calibration(path: Path) -> Calibration:
    data = _load_yaml(path)
    try:
        tissue = ThermalParams(**_require(data, "tissue", str(path)))
        tool = ToolParams(**_require(data, "tool", str(path)))
        steps_raw = _require(data, "steps", str(path))
        step_scales = {float(k): float(v["d_max_scale"])
                       for k, v in steps_raw.items()}
        sensor = SensorModel(**data.get("sensor", {"tau": 0.0176}))
        sim_raw = dict(data.get("sim", {}))
        sim = SimSettings(sensor=sensor, camera=CameraModel(), **sim_raw)
        tuning_raw = data.get("filters", {})
        tuning = FilterTuning(**{
            k: tuple(v) if isinstance(v, list) else v
            for k, v in tuning_raw.items()})
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad calibration file {path}: {exc}") from exc
    return Calibration(tissue=tissue, tool=tool, step_scales=step_scales,
                       sim=sim, tuning=tuning)


def _load_weights(data: dict) -> CostWeights:
    try:
        return CostWeights(**data.get("weights", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad weights block: {exc}") from exc


def _calibration_for(data: dict, path: Path) -> Calibration:
    cal_name = data.get("calibration", "calibration.yaml")
    cal_path = Path(cal_name)
    if not cal_path.is_absolute():
        cal_path = path.parent / cal_path
    return load_calibration(cal_path)


def load_scenario(path) -> tuple[SuiteConfig, CellSpec, str]:
    """Single-trial scenario: returns (suite-of-one, cell, phantom name)."""
    path = Path(path)
    data = _load_yaml(path)
    controller = _require(data, "controller", str(path))
    if controller not in ("constant", "thermo"):
        raise ConfigError(f"unknown controller '{controller}' in {path}")
    phantom = _require(data, "phantom", str(path))
    if phantom not in PHANTOM_NAMES:
        raise ConfigError(f"unknown phantom '{phantom}' in {path}")
    cell = CellSpec(name=data.get("name", controller),
                    controller=controller,
                    velocity=float(data.get("velocity", 0.007)))
    try:
        suite = SuiteConfig(
            cells=[cell],
            phantoms=[phantom],
            seeds=[int(data.get("seed", 0))],
            calibration=_calibration_for(data, path),
            weights=_load_weights(data),
            cut_length=float(data.get("cut_length", 0.2)),
            failure_deflection=float(data.get("failure_deflection", 0.010)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario file {path}: {exc}") from exc
    return suite, cell, phantom


def load_suite(path) -> SuiteConfig:
    path = Path(path)
    data = _load_yaml(path)
    cells_raw = _require(data, "controllers", str(path))
    if not isinstance(cells_raw, list) or not cells_raw:
        raise ConfigError(f"'controllers' must be a non-empty list in "
                          f"{path}")
    cells = []
    for entry in cells_raw:
        controller = _require(entry, "controller", f"{path} controllers")
        if controller not in ("constant", "thermo"):
            raise ConfigError(f"unknown controller '{controller}' in {path}")
        cells.append(CellSpec(
            name=str(entry.get("name", controller)),
            controller=controller,
            velocity=float(entry.get("velocity", 0.007))))
    phantoms = _require(data, "phantoms", str(path))
    for name in phantoms:
        if name not in PHANTOM_NAMES:
            raise ConfigError(f"unknown phantom '{name}' in {path}")
    seeds = [int(s) for s in _require(data, "seeds", str(path))]
    if not seeds:
        raise ConfigError(f"'seeds' must be non-empty in {path}")
    try:
        return SuiteConfig(
            cells=cells,
            phantoms=list(phantoms),
            seeds=seeds,
            calibration=_calibration_for(data, path),
            weights=_load_weights(data),
            cut_length=float(data.get("cut_length", 0.2)),
            failure_deflection=float(data.get("failure_deflection", 0.010)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad suite file {path}: {exc}") from exc

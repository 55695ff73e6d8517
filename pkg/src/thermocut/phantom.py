"""Stepped tissue-phantom parameter profile.

Five equal segments along the cut; the second and fourth are raised and
fibre-reinforced, which shows up as a cutting-force multiplier and - via
the depth coupling - a higher effective source power. Everything here is
a pure lookup from cut position to local parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .thermal import ThermalParams

RAISED_INDICES = (1, 3)


@dataclass(frozen=True)
class SegmentParams:
    """Local tissue constants plus the force multiplier for this segment."""

    tissue: ThermalParams
    d_max_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.d_max_scale < 1.0:
            raise ValueError("d_max multiplier must be >= 1")


@dataclass(frozen=True)
class PhantomProfile:
    """Ordered segment list with the raised-step geometry."""

    segments: tuple[SegmentParams, ...]
    segment_length: float = 0.05
    step_height: float = 0.0

    def __post_init__(self) -> None:
        if len(self.segments) != 5:
            raise ValueError("profile expects exactly five segments")
        if self.step_height not in (0.0, 0.002, 0.003):
            raise ValueError("step height must be 0, 2 mm, or 3 mm")

    @property
    def length(self) -> float:
        return self.segment_length * len(self.segments)


def stepped_profile(base: ThermalParams, step_height: float,
                    d_max_scale: float) -> PhantomProfile:
    """Profile with raised segments 1 and 3 (zero-based).

    Raised segments multiply the cutting-force ceiling by d_max_scale and
    scale the linear source power by (depth + step)/depth, the depth
    coupling of the extra material.
    """
    if step_height == 0.0:
        flat = SegmentParams(tissue=base)
        return PhantomProfile(segments=(flat,) * 5, step_height=0.0)
    q_scale = (base.depth + step_height) / base.depth
    raised_tissue = replace(base, linear_power=base.linear_power * q_scale)
    flat = SegmentParams(tissue=base)
    raised = SegmentParams(tissue=raised_tissue, d_max_scale=d_max_scale)
    segments = tuple(raised if i in RAISED_INDICES else flat
                     for i in range(5))
    return PhantomProfile(segments=segments, step_height=step_height)


def params_at(profile: PhantomProfile, x: float) -> SegmentParams:
    """Segment containing cut position x; intervals are [start, end)."""
    if not 0.0 <= x <= profile.length:
        raise ValueError(f"position {x} outside phantom [0, "
                         f"{profile.length}]")
    index = min(int(x / profile.segment_length), len(profile.segments) - 1)
    return profile.segments[index]

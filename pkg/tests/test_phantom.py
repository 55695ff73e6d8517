"""Segment lookup on the stepped phantom."""

import pytest

from thermocut.phantom import PhantomProfile, SegmentParams, params_at, \
    stepped_profile
from thermocut.thermal import ThermalParams

BASE = ThermalParams(conductivity=0.6, density=1090.0, specific_heat=3421.0,
                     ambient=20.0, isotherm=60.0, linear_power=120.0,
                     depth=0.002)


def test_flat_profile_uniform():
    prof = stepped_profile(BASE, 0.0, 1.0)
    assert prof.length == pytest.approx(0.25)
    for x in (0.0, 0.06, 0.12, 0.18, 0.24):
        assert params_at(prof, x).d_max_scale == 1.0


def test_raised_segments_and_boundaries():
    prof = stepped_profile(BASE, 0.002, 2.5)
    assert params_at(prof, 0.01).d_max_scale == 1.0   # first segment
    assert params_at(prof, 0.06).d_max_scale == 2.5   # second (raised)
    assert params_at(prof, 0.05).d_max_scale == 2.5   # boundary -> right
    assert params_at(prof, 0.12).d_max_scale == 1.0
    assert params_at(prof, 0.16).d_max_scale == 2.5   # fourth (raised)
    assert params_at(prof, 0.22).d_max_scale == 1.0
    assert params_at(prof, 0.25).d_max_scale == 1.0   # end clamps to last


def test_step_scales_source_power():
    prof = stepped_profile(BASE, 0.002, 2.5)
    flat_q = params_at(prof, 0.01).tissue.linear_power
    raised_q = params_at(prof, 0.06).tissue.linear_power
    assert raised_q == pytest.approx(flat_q * (0.002 + 0.002) / 0.002)


def test_out_of_range_errors():
    prof = stepped_profile(BASE, 0.0, 1.0)
    with pytest.raises(ValueError):
        params_at(prof, -0.01)
    with pytest.raises(ValueError):
        params_at(prof, 0.26)


def test_profile_validation():
    seg = SegmentParams(tissue=BASE)
    with pytest.raises(ValueError):
        PhantomProfile(segments=(seg,) * 4)
    with pytest.raises(ValueError):
        PhantomProfile(segments=(seg,) * 5, step_height=0.001)
    with pytest.raises(ValueError):
        SegmentParams(tissue=BASE, d_max_scale=0.5)

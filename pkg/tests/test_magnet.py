import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinxbar import kernels
from spinxbar.errors import InvalidParameterError
from spinxbar.magnet import (
    IN_PLANE,
    MagnetParams,
    MagnetState,
    SpinDrive,
    critical_current,
    energy_barrier,
    llgs_integrate,
    spin_torque_rate,
    tilted_state,
)

PMA = MagnetParams(30e-9, 30e-9, 1.3e-9, 1257.3, 2.3e6, 0.008)
ETA = 0.921
DOWN = (0.0, 0.0, -1.0)


def run(drive_ratio, horizon=60e-9, stop=True, runner=None, magnet=PMA):
    i = drive_ratio * critical_current(magnet, ETA)
    pol = tuple(-magnet.easy_axis)
    return llgs_integrate(
        magnet, tilted_state(magnet, +1, 1.0), SpinDrive(i, pol, ETA), horizon, 1e-12, stop_on_switch=stop, run=runner
    )


def test_energy_barrier_hand_value():
    # K V = 2.3e5 J/m^3 * (30 nm)^2 * 1.3 nm
    eb = energy_barrier(PMA)
    assert eb.joules == pytest.approx(2.3e5 * 30e-9 * 30e-9 * 1.3e-9, rel=1e-12)
    assert eb.kt == pytest.approx(2.691e-19 / (1.380649e-23 * 300.0), rel=1e-9)


def test_critical_current_hand_value():
    expected = 4 * 1.602176634e-19 * 0.008 * 2.691e-19 / (1.054571817e-34 * ETA)
    assert critical_current(PMA, ETA) == pytest.approx(expected, rel=1e-9)
    assert critical_current(PMA, ETA) == pytest.approx(14.2e-6, rel=0.01)


def test_in_plane_threshold_includes_demag_term():
    ima = MagnetParams(75e-9, 25e-9, 1.7e-9, 1257.3, 8.3e5, 0.007, anisotropy_axis=IN_PLANE, demag_field=9183.0)
    base = 4 * 1.602176634e-19 * 0.007 * energy_barrier(ima).joules / (1.054571817e-34 * ETA)
    hk = 2 * 8.3e5 / 1257.3
    assert critical_current(ima, ETA) == pytest.approx(base * (1 + 9183.0 / (2 * hk)), rel=1e-9)


def test_anisotropy_field():
    assert PMA.anisotropy_field == pytest.approx(2 * 2.3e6 / 1257.3)


def test_torque_rate_scales_linearly():
    a = spin_torque_rate(PMA, 10e-6, ETA)
    assert spin_torque_rate(PMA, 20e-6, ETA) == pytest.approx(2 * a)
    assert spin_torque_rate(PMA, 10e-6, ETA / 2) == pytest.approx(a / 2)


@pytest.mark.parametrize(
    "kw",
    [dict(alpha=0.0), dict(alpha=1.0), dict(ms=-1.0), dict(k_u=0.0), dict(anisotropy_axis="diagonal"), dict(demag_field=-1.0)],
)
def test_invalid_magnet(kw):
    base = dict(length=30e-9, width=30e-9, thickness=1.3e-9, ms=1257.3, k_u=2.3e6, alpha=0.008)
    base.update(kw)
    with pytest.raises(InvalidParameterError):
        MagnetParams(**base)


def test_invalid_drive_and_efficiency():
    with pytest.raises(InvalidParameterError):
        SpinDrive(-1e-6)
    with pytest.raises(InvalidParameterError):
        SpinDrive(1e-6, (0.0, 0.0, 2.0))
    with pytest.raises(InvalidParameterError):
        critical_current(PMA, 0.0)


def test_rejects_non_unit_initial_state():
    with pytest.raises(InvalidParameterError):
        llgs_integrate(PMA, MagnetState([0.0, 0.0, 1.1]), SpinDrive(1e-6, DOWN, ETA), 1e-9)


def test_zero_drive_relaxes_without_switching():
    r = llgs_integrate(PMA, tilted_state(PMA, +1, 5.0), SpinDrive(0.0, DOWN, ETA), 5e-9, stop_on_switch=False)
    assert not r.switched
    assert r.final_state.m[2] > math.cos(math.radians(5.0))  # damped back toward the axis
    assert r.max_norm_error < 1e-6


def test_below_threshold_does_not_switch():
    assert not run(0.9, horizon=100e-9).switched


@pytest.mark.parametrize("ratio", [1.5, 2.5])
def test_above_threshold_switches(ratio):
    r = run(ratio)
    assert r.switched
    assert r.final_state.m[2] <= -0.9
    assert r.max_norm_error < 1e-6


def test_switching_time_falls_with_drive():
    times = [run(x).switching_time for x in (1.2, 1.5, 2.5, 4.0)]
    assert all(a > b for a, b in zip(times, times[1:]))


def test_stop_on_switch_matches_full_run():
    short = run(2.0)
    full = run(2.0, horizon=short.switching_time + 2e-9, stop=False)
    assert full.switching_time == short.switching_time
    assert full.steps > short.steps


def test_compiled_and_fallback_agree():
    a = run(1.5, horizon=5e-9, stop=False, runner=kernels.python_llgs_run)
    b = run(1.5, horizon=5e-9, stop=False)
    np.testing.assert_allclose(a.final_state.m, b.final_state.m, atol=1e-12)
    assert a.backend == "python"


@settings(max_examples=15, deadline=None)
@given(tilt=st.floats(0.5, 30.0), ratio=st.floats(0.0, 3.0))
def test_norm_preserved(tilt, ratio):
    i = ratio * critical_current(PMA, ETA)
    r = llgs_integrate(PMA, tilted_state(PMA, -1, tilt), SpinDrive(i, (0.0, 0.0, 1.0), ETA), 2e-9, stop_on_switch=False)
    assert abs(np.linalg.norm(r.final_state.m) - 1.0) < 1e-9
    assert r.max_norm_error < 1e-6


def test_in_plane_magnet_switches_along_x():
    ima = MagnetParams(75e-9, 25e-9, 1.7e-9, 1257.3, 8.3e5, 0.007, anisotropy_axis=IN_PLANE, demag_field=9183.0)
    r = run(2.0, magnet=ima)
    assert r.switched and r.final_state.m[0] <= -0.9

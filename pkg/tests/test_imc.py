from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinxbar import crossbar as cb
from spinxbar import devices as dv
from spinxbar import imc
from spinxbar.errors import CalibrationError, InvalidParameterError, PartialWriteError

from conftest import random_pm1

pm1 = st.sampled_from([-1, 1])


@given(st.lists(st.tuples(pm1, pm1), min_size=1, max_size=64))
def test_golden_matches_dot_and_xnor_count(pairs):
    x, w = map(list, zip(*pairs))
    out = imc.golden_mac(x, w)
    assert out == int(np.dot(x, w))
    a = sum(p == q for p, q in pairs)
    assert imc.bitcount_to_output(a, len(pairs)) == out
    assert out % 2 == len(pairs) % 2


def test_bitcount_example():
    assert imc.bitcount_to_output(5, 8) == 2
    with pytest.raises(InvalidParameterError):
        imc.bitcount_to_output(9, 8)
    with pytest.raises(InvalidParameterError):
        imc.golden_mac([1, 1], [1])


def test_ideal_levels():
    np.testing.assert_allclose(imc.ideal_levels(3.0, 1.0, 4), [4, 6, 8, 10, 12])


def test_decode_nearest_with_low_ties():
    cal = imc.AdcCalibration([0.0, 2.0, 4.0])
    assert imc.decode_count(0.9, cal) == imc.Decoded(0, False)
    assert imc.decode_count(1.0, cal).count == 0  # tie goes low
    assert imc.decode_count(1.0000001, cal).count == 1
    assert imc.decode_count(5.0, cal) == imc.Decoded(2, True)
    assert imc.decode_count(-1.0, cal) == imc.Decoded(0, True)


def test_decode_noise_is_seeded():
    cal = imc.AdcCalibration([0.0, 2.0, 4.0])
    a = [imc.decode_count(1.0, cal, 0.5, np.random.default_rng(7)).count for _ in range(3)]
    b = [imc.decode_count(1.0, cal, 0.5, np.random.default_rng(7)).count for _ in range(3)]
    assert a == b


def test_non_monotone_levels_rejected():
    with pytest.raises(CalibrationError):
        imc.AdcCalibration([0.0, 2.0, 1.0])
    with pytest.raises(InvalidParameterError):
        imc.decode_count(0.0, imc.AdcCalibration(np.zeros((2, 3)) + [0, 1, 2]))


@pytest.mark.parametrize("topo", dv.TOPOLOGIES)
def test_isolated_levels(designs, topo):
    cal = imc.calibrate_adc(designs[topo], 8, imc.ISOLATED, rows=8)
    step = np.diff(cal.levels)
    assert np.all(step > 0)
    if topo == dv.VSH:
        # high-resistance read path: negligible loading
        np.testing.assert_allclose(step, step.mean(), rtol=0.02)
    else:
        assert np.all(np.diff(step) < 0)  # loading compresses the upper counts


# ---------------------------------------------------------------- writes


@pytest.mark.parametrize("topo,per_row", [(dv.VSH, 1), (dv.STT, 2), (dv.SOT, 2)])
def test_program_small_array(designs, rng, topo, per_row):
    d = designs[topo].with_size(4, 4)
    target = random_pm1(rng, (4, 4))
    net = d.build(-target)
    rep = imc.program_weights(d, net, target)
    assert rep.success and rep.cycles_used == 4 * per_row
    assert np.array_equal(net.stored_weights(), target)
    assert all(c.switching_time is not None for c in rep.per_cell)


@pytest.mark.parametrize("topo", dv.TOPOLOGIES)
def test_rewrite_is_idempotent(designs, rng, topo):
    d = designs[topo].with_size(3, 3)
    target = random_pm1(rng, (3, 3))
    net = d.build(target)
    rep = imc.program_weights(d, net, target)
    assert rep.success
    assert np.array_equal(net.stored_weights(), target)
    assert not any(c.switched_left or c.switched_right for c in rep.per_cell)


def test_short_pulse_window_reports_partial_write(designs):
    d = designs[dv.VSH].with_size(2, 2)
    d = replace(d, write=replace(d.write, horizon=0.5e-9))
    net = d.build(-np.ones((2, 2), int))
    with pytest.raises(PartialWriteError) as exc:
        imc.program_weights(d, net, np.ones((2, 2), int))
    assert not exc.value.report.success
    rep = imc.program_weights(d, d.build(-np.ones((2, 2), int)), np.ones((2, 2), int), raise_on_failure=False)
    assert not rep.success and any(not c.ok for c in rep.per_cell)


def test_write_validation(designs):
    d = designs[dv.VSH].with_size(2, 2)
    net = d.build(np.ones((2, 2), int))
    with pytest.raises(InvalidParameterError):
        imc.program_weights(d, net, np.ones((3, 2), int))
    with pytest.raises(InvalidParameterError):
        imc.program_weights(d, net, np.zeros((2, 2), int))


def test_write_report_dict(designs):
    d = designs[dv.VSH].with_size(1, 2)
    rep = imc.program_weights(d, d.build([[1, 1]]), np.array([[1, -1]]))
    out = rep.as_dict()
    assert out["cycles_used"] == 1 and out["topology"] == dv.VSH and len(out["cells"]) == 2


# ---------------------------------------------------------------- MAC


@pytest.mark.parametrize("topo", dv.TOPOLOGIES)
def test_mac_matches_golden(designs, rng, topo):
    d = designs[topo].with_size(16, 8)
    w = random_pm1(rng, (16, 8))
    x = random_pm1(rng, 16)
    cal = imc.calibrate_adc(d, 8, imc.IN_SITU)
    res = imc.xnor_mac(d, d.build(w), x, cal)
    assert res.n_cycles == 2
    assert [int(v) for v in res.totals] == [imc.golden_mac(x, w[:, c]) for c in range(8)]
    assert len(res.rows()) == 16
    assert not any(r["saturated"] for r in res.rows())


def test_mac_validation(designs):
    d = designs[dv.VSH].with_size(8, 2)
    net = d.build(np.ones((8, 2), int))
    cal = imc.calibrate_adc(d, 4, imc.ISOLATED)
    with pytest.raises(InvalidParameterError):
        imc.xnor_mac(d, net, [1] * 7, cal, 4)
    with pytest.raises(InvalidParameterError):
        imc.xnor_mac(d, net, [1] * 8, cal, 3)
    with pytest.raises(InvalidParameterError):
        imc.xnor_mac(d, net, [1] * 8, cal, 8)
    with pytest.raises(InvalidParameterError):
        imc.calibrate_adc(d, 4, "magic")


@pytest.mark.parametrize("topo", dv.TOPOLOGIES)
def test_read_cell(designs, rng, topo):
    d = designs[topo].with_size(4, 3)
    w = random_pm1(rng, (4, 3))
    net = d.build(w)
    assert [[imc.read_cell(d, net, r, c) for c in range(3)] for r in range(4)] == w.tolist()

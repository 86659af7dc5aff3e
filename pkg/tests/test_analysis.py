import csv

import numpy as np
import pytest

from spinxbar import analysis as an
from spinxbar import crossbar as cb
from spinxbar import devices as dv
from spinxbar.errors import ConfigurationError, InvalidParameterError


def test_sense_margin_definition():
    i_min = np.array([0.0, 4.0, 8.0])
    i_max = np.array([1.0, 5.0, 9.0])
    np.testing.assert_allclose(an.sense_margin(i_min, i_max), [1.5, 1.5])


def test_linearity_of_a_line_is_one():
    a = np.arange(9)
    assert an.linearity_r2(a, 3.0 * a + 2.0) == pytest.approx(1.0)
    assert an.linearity_r2(a, (a - 4.0) ** 2) < 0.1


def test_report_from_identical_sweeps():
    i = 1e-6 * (10 + 3 * np.arange(9))
    rep = an.report_from_currents(i, i)
    assert rep.worst_case_sm == pytest.approx(1.5e-6)
    assert rep.monotone and rep.n == 8
    np.testing.assert_allclose(rep.i_mean, i)


def test_report_uses_band_edges():
    i_in = np.array([0.0, 10.0, 20.0])
    i_w = np.array([2.0, 9.0, 23.0])
    rep = an.report_from_currents(i_in, i_w)
    np.testing.assert_allclose(rep.i_min, [0, 9, 20])
    np.testing.assert_allclose(rep.i_max, [2, 10, 23])
    np.testing.assert_allclose(rep.sm, [3.5, 5.0])
    assert rep.worst_case_sm == 3.5


def test_sweep_cases_cover_both_extremes():
    cases = list(an.sweep_cases(4))
    assert len(cases) == 10
    sweep, a, x, w = cases[7]
    assert sweep == an.W_SWEEP and a == 2 and x == [1, 1, 1, 1] and w == [1, 1, -1, -1]
    for _, a, x, w in cases:
        assert sum(p == q for p, q in zip(x, w)) == a


def test_background_is_balanced():
    b = an.background_weights(8, 64)
    assert b.sum() == 0 and b[0, 0] == 1 and b[0, 1] == -1


def test_rdm_formula_hand_value():
    # (14.2 - 1.69) / 14.2 = 0.88098...
    assert an.rdm_percent(14.2e-6, 1.69e-6) == pytest.approx(88.098591549, abs=1e-6)
    assert round(an.rdm_percent(14.2e-6, 1.69e-6), 1) == 88.1
    with pytest.raises(InvalidParameterError):
        an.rdm_percent(0.0, 1e-6)


class _Fake:
    def __init__(self, currents, ap):
        self.el_mtj = np.arange(len(currents))
        self.mtj_ap = np.asarray(ap)
        self.branch_currents = np.asarray(currents, dtype=float)


def test_disturb_filters_state_relevant_currents():
    net = _Fake([2e-6, -3e-6, 5e-6, -1e-6], [False, False, True, True])
    got = an.disturb_currents(net, net)
    # P junction pushed toward AP by +2 uA; AP junction pushed toward P by -1 uA
    assert got == {dv.P_TO_AP: 2e-6, dv.AP_TO_P: 1e-6}


def test_disturb_margin_picks_worst_direction():
    net = _Fake([2e-6, -1e-6], [False, True])
    rep = an.read_disturb_margin(net, net, {dv.P_TO_AP: 4e-6, dv.AP_TO_P: 10e-6})
    assert rep.rdm == pytest.approx(50.0)
    assert rep.i_mtj_max == 2e-6
    with pytest.raises(ConfigurationError):
        an.read_disturb_margin(net, net, {dv.P_TO_AP: 4e-6})


def test_isolated_sweep_bands_collapse(designs):
    rep = an.sense_margin_sweep(designs[dv.VSH].with_size(8, 4), isolated=True)
    np.testing.assert_allclose(rep.i_min, rep.i_max, rtol=1e-12)
    assert rep.linearity_r2 > 0.999 and rep.monotone
    # the two FET bit-cells tap the bit line one segment apart
    rep = an.sense_margin_sweep(designs[dv.STT].with_size(8, 4), isolated=True)
    np.testing.assert_allclose(rep.i_min, rep.i_max, rtol=1e-3)


@pytest.mark.parametrize("topo", dv.TOPOLOGIES)
def test_full_sweep_is_monotone(designs, topo):
    d = designs[topo].with_size(16, 16)
    rep = an.sense_margin_sweep(d, column=3)
    assert rep.monotone and rep.worst_case_sm > 0
    assert rep.column == 3


def test_sweep_validation(designs):
    d = designs[dv.VSH].with_size(4, 4)
    with pytest.raises(InvalidParameterError):
        an.sense_margin_sweep(d, n=8)
    with pytest.raises(InvalidParameterError):
        an.sense_margin_sweep(d, column=4, n=4)


def test_design_rdm_below_hundred(designs):
    rep = an.design_rdm(designs[dv.SOT].with_size(8, 8))
    assert 0 < rep.rdm < 100
    assert rep.worst_case.endswith(tuple(f"a={k}" for k in range(9)))


def test_cooptimize_records_failures(designs):
    d = designs[dv.VSH].with_size(8, 2)
    surf = an.cooptimize_sm(d, [0.2, 0.4], [1.2e-9, -1.0e-9])
    assert set(surf.failures) == {(0.2, -1e-9), (0.4, -1e-9)}
    assert np.isnan(surf.sm[:, 1]).all()
    assert surf.argmax == (0.4, 1.2e-9)
    assert surf.sm[1, 0] == pytest.approx(2 * surf.sm[0, 0], rel=1e-9)  # frozen mode is linear in V_READ


def test_cooptimize_parallel_matches_serial(designs):
    d = designs[dv.STT].with_size(8, 2)
    a = an.cooptimize_sm(d, [0.1, 0.2], [1.1e-9, 1.3e-9], jobs=1)
    b = an.cooptimize_sm(d, [0.1, 0.2], [1.1e-9, 1.3e-9], jobs=2)
    assert np.array_equal(a.sm, b.sm)


def test_long_csv(tmp_path, designs):
    rep = an.sense_margin_sweep(designs[dv.STT].with_size(8, 1), isolated=True)
    p = tmp_path / "sm.csv"
    an.write_long_csv(p, rep.rows(v_read=0.1, t_ox=1.1))
    rows = list(csv.DictReader(open(p, encoding="utf-8")))
    assert list(rows[0]) == ["v_read", "t_ox", "a", "i_min", "i_max", "sm"]
    assert len(rows) == 9 and rows[0]["sm"] == "" and float(rows[1]["sm"]) > 0

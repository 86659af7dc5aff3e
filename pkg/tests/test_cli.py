import json

import numpy as np
import pytest

from spinxbar import cli
from spinxbar import io as sio


@pytest.fixture
def inputs(tmp_path):
    sio.write_pm1_csv(tmp_path / "w8.csv", np.ones((8, 8), int))
    r = np.random.default_rng(3)
    sio.write_pm1_csv(tmp_path / "w.csv", r.choice([-1, 1], (16, 4)))
    sio.write_pm1_csv(tmp_path / "x.csv", r.choice([-1, 1], (16, 1)))
    return tmp_path


def read_bytes(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_program_vsh_eight_cycles(inputs):
    out = inputs / "p"
    assert cli.main(["program", str(inputs / "w8.csv"), "--out", str(out)]) == 0
    rep = json.loads((out / "write_report.json").read_text())
    assert rep["cycles_used"] == 8 and rep["success"]
    first = read_bytes(out)
    assert cli.main(["program", str(inputs / "w8.csv"), "--out", str(out)]) == 0
    assert read_bytes(out) == first


def test_program_fet_two_cycles_per_row(inputs):
    out = inputs / "p"
    assert cli.main(["program", str(inputs / "w8.csv"), "--topology", "sot", "--out", str(out)]) == 0
    assert json.loads((out / "write_report.json").read_text())["cycles_used"] == 16


def test_program_partial_write_exit_one(inputs):
    (inputs / "short.yaml").write_text("write:\n  horizon_seconds: 1.0e-9\n", encoding="utf-8")
    code = cli.main(["program", str(inputs / "w8.csv"), "--config", str(inputs / "short.yaml"), "--out", str(inputs / "p")])
    assert code == 1
    assert not json.loads((inputs / "p" / "write_report.json").read_text())["success"]


@pytest.mark.parametrize("topo", ["vsh", "stt", "sot"])
def test_mac_matches_golden(inputs, topo):
    out = inputs / topo
    args = ["mac", str(inputs / "w.csv"), str(inputs / "x.csv"), "--topology", topo, "--out", str(out), "--netlist"]
    assert cli.main(args) == 0
    s = json.loads((out / "mac_summary.json").read_text())
    assert s["mismatches"] == 0 and s["out_m"] == s["golden_out_m"] and s["cycles"] == 2
    assert (out / "netlist.sp").read_text().startswith("* spinxbar")
    assert (out / "mac_cycles.csv").read_text().count("\n") == 1 + 2 * 4


def test_mac_isolated_calibration(inputs):
    out = inputs / "iso"
    args = ["mac", str(inputs / "w.csv"), str(inputs / "x.csv"), "--topology", "stt", "--isolated-column", "--out", str(out)]
    assert cli.main(args) == 0
    assert json.loads((out / "mac_summary.json").read_text())["adc"] == "isolated"


def test_mac_length_mismatch_exit_two(inputs):
    assert cli.main(["mac", str(inputs / "w.csv"), str(inputs / "w8.csv"), "--out", str(inputs / "m")]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["program", "missing.csv"],
        ["area", "--jobs", "0"],
        ["area", "--config", "missing.yaml"],
    ],
)
def test_validation_exit_two(inputs, argv):
    assert cli.main(argv + ["--out", str(inputs / "o")]) == 2


def test_bad_config_key_exit_two(inputs):
    (inputs / "bad.yaml").write_text("nonsense: 1\n", encoding="utf-8")
    assert cli.main(["area", "--config", str(inputs / "bad.yaml"), "--out", str(inputs / "o")]) == 2


def test_numerical_failure_exit_three(inputs):
    # a vanishing read voltage collapses the ADC levels
    (inputs / "flat.yaml").write_text("designs:\n  vsh:\n    v_read_volts: 1.0e-30\n", encoding="utf-8")
    args = ["mac", str(inputs / "w.csv"), str(inputs / "x.csv"), "--config", str(inputs / "flat.yaml"), "--out", str(inputs / "o")]
    assert cli.main(args) == 3


def test_area(inputs, capsys):
    assert cli.main(["area", "--out", str(inputs / "a")]) == 0
    text = (inputs / "a" / "area.csv").read_text()
    assert text.splitlines()[0] == "topology,area_um2,vsh_reduction_percent"
    assert "vsh" in capsys.readouterr().out


def test_sweep_sm_threshold(inputs):
    out = inputs / "s"
    assert cli.main(["sweep-sm", "--topology", "stt", "--out", str(out)]) == 0
    assert cli.main(["sweep-sm", "--topology", "stt", "--out", str(out), "--min-sm-ua", "100"]) == 1
    s = json.loads((out / "sm_summary.json").read_text())
    assert s["topology"] == "stt" and len(s["i_min_amps"]) == 9


def test_rdm_all_topologies(inputs):
    out = inputs / "r"
    assert cli.main(["rdm", "--isolated-column", "--out", str(out)]) == 0
    lines = (out / "rdm.csv").read_text().splitlines()
    assert lines[0] == "topology,direction,i_mtj_amps,i_cr_amps,rdm_percent"
    assert {line.split(",")[0] for line in lines[1:]} == {"vsh", "stt", "sot"}


def test_cooptimize_small_grid(inputs):
    (inputs / "g.yaml").write_text(
        "array: {rows: 8, cols: 4}\nsweeps: {v_read_volts: [0.3, 0.4], t_ox_nm: [1.2, 1.3]}\n", encoding="utf-8"
    )
    out = inputs / "c"
    assert cli.main(["cooptimize", "--config", str(inputs / "g.yaml"), "--out", str(out), "--jobs", "2"]) == 0
    s = json.loads((out / "sm_surface.json").read_text())
    assert s["argmax"] == {"v_read_volts": 0.4, "t_ox_nm": 1.2}
    assert (out / "sm_surface.csv").read_text().count("\n") == 1 + 4 * 9


def test_compare_small(inputs):
    (inputs / "s.yaml").write_text("array: {rows: 8, cols: 8}\n", encoding="utf-8")
    out = inputs / "cmp"
    assert cli.main(["compare", "--config", str(inputs / "s.yaml"), "--out", str(out)]) == 0
    header = (out / "compare.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "topology" and "rdm_percent" in header and "imc_energy_j" in header


def test_log_level_from_env(inputs, monkeypatch):
    monkeypatch.setenv("SPINXBAR_LOG", "debug")
    assert cli.main(["area", "--out", str(inputs / "a")]) == 0

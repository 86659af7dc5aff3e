import pytest

from spinxbar import cost
from spinxbar import devices as dv
from spinxbar.errors import ConfigurationError, InvalidParameterError

T = cost.LayoutTemplate()


def test_areas_from_pitches():
    # 2 GP x 3 FP, one bit-cell
    assert cost.cell_area(T, dv.VSH) == pytest.approx(2 * 54e-9 * 3 * 34e-9)
    assert cost.cell_area(T, dv.STT) == pytest.approx(2 * cost.cell_area(T, dv.VSH))
    assert cost.cell_area(T, dv.SOT) == pytest.approx(2 * 54e-9 * 4 * 36e-9 * 2)


def test_area_reduction():
    assert cost.area_reduction(T, dv.VSH, dv.STT) == pytest.approx(50.0)
    assert cost.area_reduction(T, dv.VSH, dv.VSH) == 0.0


def test_layout_validation():
    with pytest.raises(InvalidParameterError):
        cost.CellLayout(0, 3)
    with pytest.raises(InvalidParameterError):
        cost.CellLayout(2, 3, "XP")
    with pytest.raises(InvalidParameterError):
        cost.LayoutTemplate(gate_pitch=0.0)
    with pytest.raises(ConfigurationError):
        cost.LayoutTemplate(cells=()).layout(dv.VSH)


def test_energy_and_latency_hand_values():
    tr = cost.OperationTrace(
        "x",
        swings=[cost.LineSwing("A", 0.9, 1e-15, 1000.0), cost.LineSwing("B", 0.4, 2e-15, 100.0)],
        static=[cost.StaticPath(0.9, 10e-6, 1e-9)],
        cycles=3,
        pulse=1e-9,
        settle_factor=2.2,
    )
    dyn = 1e-15 * 0.81 + 2e-15 * 0.16
    assert cost.operation_energy(tr) == pytest.approx(3 * (dyn + 0.9 * 10e-6 * 1e-9))
    assert cost.settle_time(tr) == pytest.approx(2.2 * 1000.0 * 1e-15)
    assert cost.operation_latency(tr) == pytest.approx(3 * (2.2e-12 + 1e-9))


def test_trace_validation():
    with pytest.raises(InvalidParameterError):
        cost.OperationTrace("x", cycles=0)
    with pytest.raises(InvalidParameterError):
        cost.StaticPath(1.0, 1.0, -1.0)


def test_cycle_counts(designs, cfg):
    d = designs[dv.STT]
    assert cost.imc_trace(d, cfg.layout, cfg.cost).cycles == 8
    assert cost.read_trace(d, cfg.layout, cfg.cost).cycles == 1


def test_cost_table_shape(designs, cfg):
    small = {t: d.with_size(8, 8) for t, d in designs.items()}
    rows = cost.cost_table(small, cfg.layout, cfg.cost)
    assert [r["topology"] for r in rows] == list(dv.TOPOLOGIES)
    for r in rows:
        assert all(r[f"{op}_energy_j"] > 0 and r[f"{op}_latency_s"] > 0 for op in cost.OPS)
    text = cost.table_text(rows)
    assert text.splitlines()[0].split()[0] == "topology"
    assert cost.table_csv(rows).count("\n") == 4

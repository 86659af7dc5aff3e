"""Layout area from pitch templates and first-order RC energy/latency."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import crossbar as cb
from . import devices as dv
from .design import Design
from .imc import write_cycle
from .errors import ConfigurationError, InvalidParameterError

FP = "FP"
MP = "MP"


@dataclass(frozen=True)
class CellLayout:
    width_gp: int
    height_tracks: int
    height_unit: str = FP  # fin pitch or metal pitch
    bitcells: int = 1

    def __post_init__(self):
        if self.width_gp < 1 or self.height_tracks < 1 or self.bitcells < 1:
            raise InvalidParameterError("track counts must be at least 1")
        if self.height_unit not in (FP, MP):
            raise InvalidParameterError(f"height unit must be FP or MP, got {self.height_unit!r}")


@dataclass(frozen=True)
class LayoutTemplate:
    gate_pitch: float = 54e-9
    fin_pitch: float = 34e-9
    metal_pitch: float = 36e-9
    cells: tuple = (
        (dv.VSH, CellLayout(2, 3, FP, 1)),
        (dv.STT, CellLayout(2, 3, FP, 2)),
        (dv.SOT, CellLayout(2, 4, MP, 2)),
    )

    def __post_init__(self):
        if min(self.gate_pitch, self.fin_pitch, self.metal_pitch) <= 0:
            raise InvalidParameterError("pitches must be positive")

    def layout(self, topology: str) -> CellLayout:
        for t, c in self.cells:
            if t == topology:
                return c
        raise ConfigurationError(f"no layout template for {topology!r}")

    def dims(self, topology: str) -> tuple:
        """(width along row lines, height along column lines) of one XNOR cell."""
        c = self.layout(topology)
        unit = self.fin_pitch if c.height_unit == FP else self.metal_pitch
        return c.width_gp * self.gate_pitch, c.height_tracks * unit * c.bitcells


def cell_area(template: LayoutTemplate, topology: str) -> float:
    w, h = template.dims(topology)
    return w * h


def area_reduction(template: LayoutTemplate, ours: str, other: str) -> float:
    """Percent area saved by ``ours`` relative to ``other``."""
    return (1.0 - cell_area(template, ours) / cell_area(template, other)) * 100.0


# ------------------------------------------------------------------ traces


@dataclass(frozen=True)
class CostParams:
    # invented first-order defaults, all configurable
    c_gate_per_fin: float = 0.1e-15
    c_drain_per_fin: float = 0.05e-15
    c_vsh_gate: float = 0.05e-15
    c_vsh_contact: float = 0.02e-15
    t_sense: float = 0.2e-9
    settle_factor: float = 2.2


@dataclass(frozen=True)
class LineSwing:
    line: str
    delta_v: float
    capacitance: float
    resistance: float = 0.0  # drive-path resistance for the settle estimate


@dataclass(frozen=True)
class StaticPath:
    voltage: float
    current: float
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise InvalidParameterError("durations must be non-negative")


@dataclass
class OperationTrace:
    op: str
    swings: list = field(default_factory=list)
    static: list = field(default_factory=list)
    cycles: int = 1
    pulse: float = 0.0
    settle_factor: float = 2.2

    def __post_init__(self):
        if self.cycles < 1:
            raise InvalidParameterError("cycles must be at least 1")


def operation_energy(trace: OperationTrace) -> float:
    """cycles * (sum C dV^2 + sum V I t)."""
    dyn = sum(s.capacitance * s.delta_v**2 for s in trace.swings)
    stat = sum(p.voltage * p.current * p.duration for p in trace.static)
    return trace.cycles * (dyn + stat)


def settle_time(trace: OperationTrace) -> float:
    return max((trace.settle_factor * s.resistance * s.capacitance for s in trace.swings), default=0.0)


def operation_latency(trace: OperationTrace) -> float:
    """cycles * (slowest line settle + pulse)."""
    return trace.cycles * (settle_time(trace) + trace.pulse)


class _Lines:
    """Per-line capacitance and drive resistance for one design."""

    def __init__(self, design: Design, template: LayoutTemplate, cp: CostParams):
        self.d = design
        topo = design.topology
        ref_w, ref_h = template.dims(dv.VSH)
        w, h = template.dims(topo)
        c_cell = design.line_capacitance_per_cell
        self.c_row_wire = c_cell * w / ref_w  # per cell along a row line
        self.c_col_wire = c_cell * h / ref_h  # per XNOR cell along a column line
        R, C = design.rows, design.cols
        seg = design.line_resistance_per_cell
        self.r_row = design.r_driver + seg * C
        self.r_col = design.r_driver + seg * R
        self.r_bl = design.r_sense + seg * R
        cell = design.cell
        nf = cell.transistor.n_fin if cell.transistor else 0
        nfw = cell.write_transistor.n_fin if cell.write_transistor else nf
        if topo == dv.VSH:
            self.c_wl = C * (self.c_row_wire + cp.c_vsh_gate)
            self.c_rwl = C * (self.c_row_wire + cp.c_vsh_contact)
            self.c_bl = R * (self.c_col_wire + cp.c_vsh_contact)
            self.c_blb = self.c_bl
        elif topo == dv.STT:
            self.c_wl = C * (self.c_row_wire + nf * cp.c_gate_per_fin)
            self.c_bl = R * self.c_col_wire
            self.c_sl = R * self.c_col_wire + 2 * R * nf * cp.c_drain_per_fin
        else:
            self.c_rwl = C * (self.c_row_wire + nf * cp.c_gate_per_fin)
            self.c_wwl = C * (self.c_row_wire + nfw * cp.c_gate_per_fin)
            self.c_bl = R * self.c_col_wire + 2 * R * (nf + nfw) * cp.c_drain_per_fin
            self.c_sl = R * self.c_col_wire


def _static_paths(bn: cb.BiasedNetwork, res: cb.SolveResult, duration: float) -> list:
    """Power drawn from every driven source, as V * I_out."""
    out = []
    for v, i in zip(bn.source_v, res.source_currents):
        if np.isnan(v) or abs(i) == 0.0:
            continue
        out.append(StaticPath(float(v), float(i), duration))
    return out


def compute_swings(design: Design, lines: _Lines, n_rows: int) -> list:
    vdd, vr = design.scheme.vdd, design.scheme.v_read
    sw = []
    if design.topology == dv.VSH:
        for _ in range(n_rows):
            sw.append(LineSwing("WL", vdd, lines.c_wl, lines.r_row))
            sw.append(LineSwing("RWL", vr, lines.c_rwl, lines.r_row))
    else:
        gate = "WL" if design.topology == dv.STT else "RWL"
        c_gate = lines.c_wl if design.topology == dv.STT else lines.c_rwl
        # BL already sits at V_READ in hold, so only the gates move
        for _ in range(n_rows):
            sw.append(LineSwing(gate, vdd, c_gate, lines.r_row))
    return sw


def write_swings(design: Design, lines: _Lines) -> list:
    vdd = design.scheme.vdd
    C = design.cols
    if design.topology == dv.VSH:
        # one of BL/BLB per column falls to 0 and is restored
        return [LineSwing("WL", vdd, lines.c_wl, lines.r_row)] + [LineSwing("BL|BLB", vdd, lines.c_bl, lines.r_col)] * C
    if design.topology == dv.STT:
        gate = LineSwing("WL", vdd, lines.c_wl, lines.r_row)
    else:
        gate = LineSwing("WWL", vdd, lines.c_wwl, lines.r_row)
    # half the columns raise BL, half raise SL
    half = C // 2
    return [gate] + [LineSwing("BL", vdd, lines.c_bl, lines.r_col)] * (C - half) + [LineSwing("SL", vdd, lines.c_sl, lines.r_col)] * half


def _checker(rows, cols):
    return np.where(np.indices((rows, cols)).sum(axis=0) % 2 == 0, 1, -1)


def write_trace(design: Design, template: LayoutTemplate, cp: CostParams) -> OperationTrace:
    """Full-array program: one row group per cycle (two cycles per row for FET cells)."""
    lines = _Lines(design, template, cp)
    target = _checker(design.rows, design.cols)
    net = design.build(-target)  # every cell must switch
    per_row = 1 if design.topology == dv.VSH else 2
    pulse = 0.0
    static = []
    for k in range(1, per_row + 1):
        bn = cb.apply_bias(net, design.scheme, cb.WRITE, write_target=cb.WriteTarget(0, tuple(target[0]), k))
        res = design.solve(bn)
        outcome = write_cycle(design, net, 0, target[0], k)
        times = [c.switching_time for c in outcome if c.switching_time is not None]
        if not times or not all(c.ok for c in outcome):
            raise ConfigurationError(f"{design.topology}: write drive does not switch the reference row")
        p = max(times) * (1.0 + design.write.pulse_margin)
        pulse = max(pulse, p)
        static += _static_paths(bn, res, p / per_row)
    swings = write_swings(design, lines)
    return OperationTrace("write", swings, static, cycles=design.rows * per_row, pulse=pulse, settle_factor=cp.settle_factor)


def _compute_trace(design: Design, template: LayoutTemplate, cp: CostParams, op: str) -> OperationTrace:
    lines = _Lines(design, template, cp)
    w = _checker(design.rows, design.cols)
    net = design.build(w)
    if op == "read":
        rows, inputs, cycles = [0], [1], 1
    else:
        g = design.group_size
        rows, cycles = list(range(g)), design.rows // g
        inputs = [1 if r % 4 < 2 else -1 for r in rows]
    bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=inputs, asserted_rows=rows)
    res = design.solve(bn)
    swings = compute_swings(design, lines, len(rows))
    trace = OperationTrace(op, swings, [], cycles=cycles, pulse=cp.t_sense, settle_factor=cp.settle_factor)
    trace.static = _static_paths(bn, res, settle_time(trace) + cp.t_sense)
    return trace


def read_trace(design: Design, template: LayoutTemplate, cp: CostParams) -> OperationTrace:
    return _compute_trace(design, template, cp, "read")


def imc_trace(design: Design, template: LayoutTemplate, cp: CostParams) -> OperationTrace:
    """Full 64-row MAC: rows / group PWA cycles."""
    return _compute_trace(design, template, cp, "imc")


OPS = ("write", "read", "imc")
_TRACE = {"write": write_trace, "read": read_trace, "imc": imc_trace}


def cost_table(designs: dict, template: LayoutTemplate, cp: CostParams) -> list:
    """One row per topology with area and per-op energy (J) and latency (s)."""
    rows = []
    for topo, d in designs.items():
        row = {"topology": topo, "area_m2": cell_area(template, topo)}
        for op in OPS:
            tr = _TRACE[op](d, template, cp)
            row[f"{op}_energy_j"] = operation_energy(tr)
            row[f"{op}_latency_s"] = operation_latency(tr)
        rows.append(row)
    return rows


def table_csv(rows: list) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def table_text(rows: list) -> str:
    """Aligned plain-text rendering of a table of dicts."""
    if not rows:
        return ""
    keys = list(rows[0])
    cells = [[k for k in keys]] + [[_fmt(r[k]) for k in keys] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(keys))]
    return "\n".join("  ".join(c[i].rjust(widths[i]) for i in range(len(keys))) for c in cells) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)

"""Write sequencing, ADC decode and XNOR multiply-accumulate."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import crossbar as cb
from . import devices as dv
from .design import Design
from .errors import CalibrationError, InvalidParameterError, PartialWriteError
from .magnet import SpinDrive, llgs_integrate, tilted_state

log = logging.getLogger(__name__)

ISOLATED = "isolated"
IN_SITU = "in-situ"


# ------------------------------------------------------------------ golden


def golden_mac(inputs, weights) -> int:
    """Exact integer dot product of two +1/-1 vectors."""
    x = [int(v) for v in inputs]
    w = [int(v) for v in weights]
    if len(x) != len(w):
        raise InvalidParameterError(f"length mismatch: {len(x)} inputs vs {len(w)} weights")
    if any(v not in (1, -1) for v in x + w):
        raise InvalidParameterError("entries must be +1/-1")
    return sum(a * b for a, b in zip(x, w))


def bitcount_to_output(a: int, n: int) -> int:
    if not 0 <= a <= n:
        raise InvalidParameterError(f"count {a} outside 0..{n}")
    return 2 * a - n


# ------------------------------------------------------------------ write


@dataclass(frozen=True)
class CellWrite:
    row: int
    col: int
    switched_left: bool
    switched_right: bool
    switching_time: float | None
    ok: bool


@dataclass
class WriteReport:
    cycles_used: int
    per_cell: list
    success: bool
    pulse_widths: list = field(default_factory=list)
    topology: str = ""

    def as_dict(self) -> dict:
        return {
            "topology": self.topology,
            "cycles_used": self.cycles_used,
            "success": self.success,
            "pulse_widths_s": self.pulse_widths,
            "cells": [c.__dict__ for c in self.per_cell],
        }


@lru_cache(maxsize=4096)
def _switch(magnet, efficiency, spin_current, pol, start_sign, write):
    drive = SpinDrive(spin_current, pol, efficiency)
    res = llgs_integrate(
        magnet,
        tilted_state(magnet, start_sign, write.tilt_deg),
        drive,
        write.horizon,
        step=write.step,
        threshold=write.threshold,
    )
    return res.switched, res.switching_time


def _state_sign(state: str) -> int:
    # pinned layers point along +easy, so P means the free layer does too
    return 1 if state == dv.P else -1


def _try_switch(design: Design, current_state: str, target_state: str, spin_current: float, pol_sign: int):
    """Returns (switched, time, ok) for one free layer."""
    if current_state == target_state:
        return False, None, True
    easy = design.magnet.easy_axis
    pol = tuple(float(v) for v in pol_sign * easy)
    switched, t = _switch(design.magnet, design.efficiency, float(spin_current), pol, _state_sign(current_state), design.write)
    ok = switched and pol_sign == _state_sign(target_state)
    return switched, t, ok


def write_cycle(design: Design, net: cb.ArrayNetwork, row: int, targets, cycle: int):
    """Solve one write cycle and update MTJ states; returns per-column outcomes."""
    bn = cb.apply_bias(net, design.scheme, cb.WRITE, write_target=cb.WriteTarget(row, tuple(targets), cycle))
    res = design.solve(bn)
    C = net.geometry.cols
    out = []
    for c in range(C):
        w = int(targets[c])
        if w == 0:
            continue
        base = (row * C + c) * 2
        want = dv.weight_states(net.topology, w)
        if net.topology == dv.VSH:
            i_ch = res.branch_currents[net.element_index("RS", row, c)]
            direction = 1 if i_ch >= 0 else -1
            split = dv.charge_to_spin(design.cell.channel, i_ch, direction)
            sides = (("L", 0, split.i_s_left, int(np.sign(split.pol_left[2]))), ("R", 1, split.i_s_right, int(np.sign(split.pol_right[2]))))
            flags, times, oks = [], [], []
            for side, slot, i_s, pol_sign in sides:
                cur = dv.AP if net.mtj_ap[base + slot] else dv.P
                sw, t, ok = _try_switch(design, cur, want[side], i_s, pol_sign)
                if ok and sw:
                    net.mtj_ap[base + slot] = want[side] == dv.AP
                flags.append(sw)
                times.append(t)
                oks.append(ok)
            t_cell = max((t for t in times if t is not None), default=None)
            out.append(CellWrite(row, c, flags[0], flags[1], t_cell, all(oks)))
        else:
            slot = cycle - 1
            key = str(cycle)
            if net.topology == dv.STT:
                i = res.branch_currents[net.element_index(f"MTJ{key}", row, c)]
                # positive current runs pinned -> free layer and favors AP
                pol_sign = -1 if i > 0 else 1
                i_s = abs(i)
            else:
                i = res.branch_currents[net.element_index(f"HMA{key}", row, c)]
                pol_sign = 1 if i > 0 else -1
                i_s = design.cell.heavy_metal.spin_current(i)
            cur = dv.AP if net.mtj_ap[base + slot] else dv.P
            sw, t, ok = _try_switch(design, cur, want[key], i_s, pol_sign)
            if ok and sw:
                net.mtj_ap[base + slot] = want[key] == dv.AP
            out.append(CellWrite(row, c, sw if slot == 0 else False, sw if slot == 1 else False, t, ok))
    return out


def program_weights(design: Design, net: cb.ArrayNetwork, weights, raise_on_failure: bool = True) -> WriteReport:
    """Program a +1/-1 matrix row by row.

    Each row is one write group driven across all columns at once.  VSH
    writes both complementary junctions in one cycle; STT/SOT need one
    cycle per bit-cell.  ``net`` MTJ states are updated in place.
    """
    w = np.asarray(weights)
    g = net.geometry
    if w.shape != (g.rows, g.cols):
        raise InvalidParameterError(f"weights shape {w.shape} does not match array {g.rows}x{g.cols}")
    if not np.all(np.isin(w, (-1, 1))):
        raise InvalidParameterError("weights must be +1/-1")
    cycles = 0
    cells = []
    pulses = []
    per_row = 1 if net.topology == dv.VSH else 2
    for r in range(g.rows):
        merged = {}
        for k in range(1, per_row + 1):
            outcome = write_cycle(design, net, r, w[r], k)
            cycles += 1
            times = [c.switching_time for c in outcome if c.switching_time is not None]
            pulses.append(max(times) * (1.0 + design.write.pulse_margin) if times else 0.0)
            for cw in outcome:
                prev = merged.get(cw.col)
                if prev is None:
                    merged[cw.col] = cw
                else:
                    t = max((x for x in (prev.switching_time, cw.switching_time) if x is not None), default=None)
                    merged[cw.col] = CellWrite(r, cw.col, prev.switched_left or cw.switched_left, prev.switched_right or cw.switched_right, t, prev.ok and cw.ok)
        cells += [merged[c] for c in sorted(merged)]
    success = all(c.ok for c in cells)
    report = WriteReport(cycles, cells, success, pulses, net.topology)
    if not success and raise_on_failure:
        bad = sum(not c.ok for c in cells)
        raise PartialWriteError(f"{bad} cell(s) failed to switch", report)
    return report


# ------------------------------------------------------------------ ADC


@dataclass
class AdcCalibration:
    """Reference currents per count; ``levels`` is (N+1,) or (cols, N+1)."""

    levels: np.ndarray
    mode: str = ISOLATED

    def __post_init__(self):
        self.levels = np.atleast_1d(np.asarray(self.levels, dtype=float))
        lv = np.atleast_2d(self.levels)
        if lv.shape[-1] < 2:
            raise CalibrationError("need at least two levels")
        if np.any(np.diff(lv, axis=-1) <= 0):
            raise CalibrationError("ADC levels are not strictly increasing; device configuration is broken")

    @property
    def n(self) -> int:
        return self.levels.shape[-1] - 1

    @property
    def thresholds(self) -> np.ndarray:
        return 0.5 * (self.levels[..., 1:] + self.levels[..., :-1])

    @property
    def per_column(self) -> bool:
        return self.levels.ndim == 2

    def for_column(self, col: int) -> "AdcCalibration":
        if not self.per_column:
            return self
        return AdcCalibration(self.levels[col], self.mode)

    def as_dict(self) -> dict:
        return {"mode": self.mode, "n": self.n, "levels_amps": self.levels.tolist(), "thresholds_amps": self.thresholds.tolist()}


@dataclass(frozen=True)
class Decoded:
    count: int
    saturated: bool


def decode_count(i_bl: float, cal: AdcCalibration, noise: float = 0.0, rng=None) -> Decoded:
    """Nearest-level decode; a current exactly on a threshold goes to the lower count."""
    if cal.per_column:
        raise InvalidParameterError("select a column calibration with for_column()")
    i = float(i_bl)
    if noise > 0:
        rng = rng if rng is not None else np.random.default_rng()
        i += float(rng.normal(0.0, noise))
    count = int(np.searchsorted(cal.thresholds, i, side="left"))
    saturated = i < cal.levels[0] or i > cal.levels[-1]
    return Decoded(count, bool(saturated))


def ideal_levels(i_h: float, i_l: float, n: int) -> np.ndarray:
    """a*I_H + (N - a)*I_L for a = 0..N."""
    a = np.arange(n + 1)
    return a * i_h + (n - a) * i_l


def calibrate_adc(design: Design, n: int | None = None, mode: str = ISOLATED, rows: int | None = None, cols: int | None = None) -> AdcCalibration:
    """Reference levels for counts 0..N.

    ``isolated`` solves a single column (W = +1, the first a inputs +1).
    ``in-situ`` solves the full array and averages the IN-sweep and
    W-sweep current of every column, giving per-column levels that absorb
    the row-line loading of a populated array.
    """
    n = design.group_size if n is None else n
    if n < 1:
        raise InvalidParameterError("N must be at least 1")
    rows = max(n, design.rows if rows is None else rows)
    if mode == ISOLATED:
        net = design.build(np.ones((rows, 1), dtype=int))
        levels = np.empty(n + 1)
        for a in range(n + 1):
            bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=[1] * a + [-1] * (n - a), asserted_rows=range(n))
            levels[a] = design.solve(bn).i_bl[0]
        return AdcCalibration(levels, ISOLATED)
    if mode != IN_SITU:
        raise InvalidParameterError(f"unknown calibration mode {mode!r}")
    cols = design.cols if cols is None else cols
    # even columns carry the pattern, odd columns its complement, so every
    # asserted row keeps an equal +1/-1 mix (balanced row-line load)
    flip = np.where(np.arange(cols) % 2 == 0, 1, -1)
    count = lambda a: np.where(flip == 1, a, n - a)  # noqa: E731
    background = np.where(np.indices((rows, cols)).sum(axis=0) % 2 == 0, 1, -1)
    net = design.build(background)
    i_in = np.empty((cols, n + 1))
    i_w = np.empty((cols, n + 1))
    for a in range(n + 1):
        ones = np.array([1] * a + [-1] * (n - a))
        w = background.copy()
        w[:n, :] = flip[None, :]
        net.set_weights(w)
        bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=ones, asserted_rows=range(n))
        i_in[np.arange(cols), count(a)] = design.solve(bn).i_bl
        w[:n, :] = ones[:, None] * flip[None, :]
        net.set_weights(w)
        bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=[1] * n, asserted_rows=range(n))
        i_w[np.arange(cols), count(a)] = design.solve(bn).i_bl
    return AdcCalibration(0.5 * (i_in + i_w), IN_SITU)


# ------------------------------------------------------------------ MAC


@dataclass
class MacCycle:
    cycle: int
    rows: tuple
    i_bl: np.ndarray
    counts: np.ndarray
    outputs: np.ndarray
    saturated: np.ndarray


@dataclass
class MacResult:
    cycles: list
    totals: np.ndarray  # per column, summed over cycles
    group_size: int

    @property
    def n_cycles(self) -> int:
        return len(self.cycles)

    def rows(self) -> list:
        out = []
        for cyc in self.cycles:
            for c in range(cyc.i_bl.size):
                out.append(
                    {
                        "cycle": cyc.cycle,
                        "column": c,
                        "i_bl_amps": float(cyc.i_bl[c]),
                        "count": int(cyc.counts[c]),
                        "out_m": int(cyc.outputs[c]),
                        "saturated": bool(cyc.saturated[c]),
                    }
                )
        return out

    def as_dict(self) -> dict:
        return {"cycles": self.n_cycles, "group_size": self.group_size, "out_m": [int(v) for v in self.totals]}


def xnor_mac(design: Design, net: cb.ArrayNetwork, inputs, cal: AdcCalibration, group_size: int | None = None, noise: float = 0.0, rng=None) -> MacResult:
    """Partial word-line activation: one compute solve per block of consecutive rows."""
    g = net.geometry
    group = design.group_size if group_size is None else group_size
    x = [int(v) for v in inputs]
    if len(x) != g.rows:
        raise InvalidParameterError(f"input length {len(x)} does not match {g.rows} rows")
    if group < 1 or g.rows % group:
        raise InvalidParameterError(f"group size {group} must divide the row count {g.rows}")
    if cal.n != group:
        raise InvalidParameterError(f"calibration is for N={cal.n}, group size is {group}")
    if cal.per_column and cal.levels.shape[0] != g.cols:
        raise InvalidParameterError("per-column calibration does not match the column count")
    cycles = []
    totals = np.zeros(g.cols, dtype=int)
    for k in range(g.rows // group):
        rows = tuple(range(k * group, (k + 1) * group))
        bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=[x[r] for r in rows], asserted_rows=rows)
        i_bl = design.solve(bn).i_bl.copy()
        dec = [decode_count(i_bl[c], cal.for_column(c), noise, rng) for c in range(g.cols)]
        counts = np.array([d.count for d in dec])
        outputs = 2 * counts - group
        cycles.append(MacCycle(k, rows, i_bl, counts, outputs, np.array([d.saturated for d in dec])))
        totals += outputs
    return MacResult(cycles, totals, group)


def read_cell(design: Design, net: cb.ArrayNetwork, row: int, col: int, cal: AdcCalibration | None = None) -> int:
    """Stored weight of one cell: an XNOR with a single asserted row and IN = +1."""
    g = net.geometry
    if not (0 <= row < g.rows and 0 <= col < g.cols):
        raise InvalidParameterError("cell index out of range")
    cal = cal or calibrate_adc(design, 1, ISOLATED, rows=g.rows)
    bn = cb.apply_bias(net, design.scheme, cb.READ, inputs=[1], asserted_rows=[row])
    i = design.solve(bn).i_bl[col]
    return bitcount_to_output(decode_count(i, cal.for_column(col)).count, 1)

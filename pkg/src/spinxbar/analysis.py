"""Sense-margin sweeps, read-disturb margin and the V_READ x T_OX surface."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import crossbar as cb
from . import devices as dv
from .design import Design
from .errors import ConfigurationError, InvalidParameterError, SpinXbarError

log = logging.getLogger(__name__)

IN_SWEEP = "in"
W_SWEEP = "w"


@dataclass
class SenseReport:
    i_min: np.ndarray  # per count a = 0..N
    i_max: np.ndarray
    sm: np.ndarray  # per a = 1..N
    worst_case_sm: float
    linearity_r2: float
    monotone: bool
    i_in: np.ndarray = field(repr=False, default=None)
    i_w: np.ndarray = field(repr=False, default=None)
    column: int = 0
    isolated: bool = False

    @property
    def n(self) -> int:
        return self.i_min.size - 1

    @property
    def i_mean(self) -> np.ndarray:
        return 0.5 * (self.i_min + self.i_max)

    def rows(self, **extra) -> list:
        out = []
        for a in range(self.n + 1):
            row = dict(extra)
            row.update(a=a, i_min=float(self.i_min[a]), i_max=float(self.i_max[a]), sm="" if a == 0 else float(self.sm[a - 1]))
            out.append(row)
        return out

    def as_dict(self) -> dict:
        return {
            "column": self.column,
            "isolated": self.isolated,
            "n": self.n,
            "worst_case_sm_amps": self.worst_case_sm,
            "linearity_r2": self.linearity_r2,
            "monotone": self.monotone,
            "i_min_amps": [float(x) for x in self.i_min],
            "i_max_amps": [float(x) for x in self.i_max],
            "sm_amps": [float(x) for x in self.sm],
        }


def sense_margin(i_min, i_max) -> np.ndarray:
    """SM(a) = (I_min[a] - I_max[a-1]) / 2 for a = 1..N."""
    i_min = np.asarray(i_min, dtype=float)
    i_max = np.asarray(i_max, dtype=float)
    return 0.5 * (i_min[1:] - i_max[:-1])


def linearity_r2(a, y) -> float:
    """Coefficient of determination of an ordinary least-squares line."""
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    coef = np.polyfit(a, y, 1)
    ss_res = float(np.sum((y - np.polyval(coef, a)) ** 2))
    return 1.0 - ss_res / ss_tot


def report_from_currents(i_in, i_w, column=0, isolated=False) -> SenseReport:
    i_in = np.asarray(i_in, dtype=float)
    i_w = np.asarray(i_w, dtype=float)
    lo = np.minimum(i_in, i_w)
    hi = np.maximum(i_in, i_w)
    sm = sense_margin(lo, hi)
    mean = 0.5 * (lo + hi)
    return SenseReport(
        i_min=lo,
        i_max=hi,
        sm=sm,
        worst_case_sm=float(sm.min()) if sm.size else float("nan"),
        linearity_r2=linearity_r2(np.arange(lo.size), mean),
        monotone=bool(np.all(np.diff(mean) > 0)),
        i_in=i_in,
        i_w=i_w,
        column=column,
        isolated=isolated,
    )


def background_weights(rows: int, cols: int) -> np.ndarray:
    """Deterministic equal +1/-1 mix: +1 where row + col is even."""
    r, c = np.indices((rows, cols))
    return np.where((r + c) % 2 == 0, 1, -1).astype(np.int8)


def sweep_cases(n: int):
    """(sweep, a, inputs, target column weights) for both extreme sweeps."""
    for sweep in (IN_SWEEP, W_SWEEP):
        for a in range(n + 1):
            ones = [1] * a + [-1] * (n - a)
            if sweep == IN_SWEEP:
                yield sweep, a, ones, [1] * n
            else:
                yield sweep, a, [1] * n, ones


def _sweep_solves(design: Design, column: int, n: int, isolated: bool):
    rows = design.rows
    if n > rows:
        raise InvalidParameterError(f"cannot assert {n} rows in a {rows}-row array")
    cols = 1 if isolated else design.cols
    col = 0 if isolated else column
    if not 0 <= column < design.cols:
        raise InvalidParameterError(f"column {column} out of range")
    base = background_weights(rows, cols)
    if isolated:
        base = background_weights(rows, design.cols)[:, [column]]
    net = None
    for sweep, a, inputs, wcol in sweep_cases(n):
        w = base.copy()
        w[:n, col] = wcol
        if net is None:
            net = design.build(w)
        else:
            net.set_weights(w)
        bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=inputs, asserted_rows=range(n))
        yield sweep, a, net, bn, design.solve(bn), col


def sense_margin_sweep(design: Design, column: int = 0, n: int | None = None, isolated: bool = False) -> SenseReport:
    """IN and W extreme sweeps on one column with every column asserted.

    Non-target columns hold a checkerboard of +1/-1.  In isolated mode the
    target column is solved alone, so no sneak path exists.
    """
    n = design.group_size if n is None else n
    i_in = np.zeros(n + 1)
    i_w = np.zeros(n + 1)
    for sweep, a, _net, _bn, res, col in _sweep_solves(design, column, n, isolated):
        (i_in if sweep == IN_SWEEP else i_w)[a] = res.i_bl[col]
    rep = report_from_currents(i_in, i_w, column, isolated)
    if not rep.monotone:
        log.warning("band means are not strictly increasing in a (column %d)", column)
    return rep


# ------------------------------------------------------------------ disturb


def rdm_percent(i_cr: float, i_mtj: float) -> float:
    """(I_CR - I_MTJ) / I_CR * 100."""
    if i_cr <= 0:
        raise InvalidParameterError("critical current must be positive")
    return (i_cr - abs(i_mtj)) / i_cr * 100.0


@dataclass
class DisturbReport:
    i_mtj_max: float
    i_cr: dict
    rdm: float
    per_direction: dict  # direction -> (max current, rdm)
    worst_case: str = ""

    def as_dict(self) -> dict:
        return {
            "i_mtj_max_amps": self.i_mtj_max,
            "rdm_percent": self.rdm,
            "i_cr_amps": dict(self.i_cr),
            "per_direction": {k: {"i_mtj_amps": v[0], "rdm_percent": v[1]} for k, v in self.per_direction.items()},
            "worst_case": self.worst_case,
        }


def disturb_currents(net: cb.ArrayNetwork, result: cb.SolveResult) -> dict:
    """Largest state-relevant MTJ current per disturb direction.

    Elements run pinned -> free layer, so positive current pushes toward AP
    and only threatens P junctions; negative current threatens AP ones.
    """
    m = net.el_mtj >= 0
    cur = result.branch_currents[m]
    ap = net.mtj_ap[net.el_mtj[m]]
    out = {}
    p_to_ap = cur[(cur > 0) & ~ap]
    ap_to_p = -cur[(cur < 0) & ap]
    if p_to_ap.size:
        out[dv.P_TO_AP] = float(p_to_ap.max())
    if ap_to_p.size:
        out[dv.AP_TO_P] = float(ap_to_p.max())
    return out


def read_disturb_margin(net: cb.ArrayNetwork, result: cb.SolveResult, i_cr: dict) -> DisturbReport:
    currents = disturb_currents(net, result)
    per = {}
    for direction, i in currents.items():
        if i <= 0:
            continue
        if direction not in i_cr:
            raise ConfigurationError(f"no critical current configured for {direction} switching")
        per[direction] = (i, rdm_percent(i_cr[direction], i))
    if not per:
        return DisturbReport(0.0, dict(i_cr), 100.0, {})
    worst = min(per, key=lambda k: per[k][1])
    return DisturbReport(max(v[0] for v in per.values()), dict(i_cr), per[worst][1], per)


def design_rdm(design: Design, column: int = 0, n: int | None = None, isolated: bool = False) -> DisturbReport:
    """Worst read-disturb margin over every operating point of the SM sweeps."""
    n = design.group_size if n is None else n
    i_cr = design.critical_currents()
    worst = None
    for sweep, a, net, _bn, res, _col in _sweep_solves(design, column, n, isolated):
        rep = read_disturb_margin(net, res, i_cr)
        rep.worst_case = f"{sweep}-sweep a={a}"
        if worst is None or rep.rdm < worst.rdm:
            worst = rep
    return worst


# ------------------------------------------------------------ co-optimization


@dataclass
class SmSurface:
    v_read: tuple
    t_ox: tuple
    sm: np.ndarray  # [i_v, i_t], NaN where a point failed
    reports: dict  # (v_read, t_ox) -> SenseReport
    failures: dict

    @property
    def argmax(self) -> tuple:
        if np.all(np.isnan(self.sm)):
            raise SpinXbarError("every grid point failed")
        i, j = np.unravel_index(np.nanargmax(self.sm), self.sm.shape)
        return self.v_read[i], self.t_ox[j]

    def rows(self) -> list:
        out = []
        for (v, t), rep in sorted(self.reports.items()):
            out += rep.rows(v_read=v, t_ox=t)
        return out


def _surface_point(args):
    design, v, t, column, n, isolated = args
    try:
        return v, t, sense_margin_sweep(design.with_v_read(v).with_t_ox(t), column, n, isolated), None
    except SpinXbarError as exc:
        return v, t, None, str(exc)


def cooptimize_sm(design: Design, v_read_values, t_ox_values, column: int = 0, n: int | None = None, isolated: bool = False, jobs: int = 1) -> SmSurface:
    """Worst-case SM over a V_READ x T_OX grid; failed points are recorded, not fatal."""
    v_read_values = tuple(float(v) for v in v_read_values)
    t_ox_values = tuple(float(t) for t in t_ox_values)
    if not v_read_values or not t_ox_values:
        raise InvalidParameterError("co-optimization grids must be non-empty")
    tasks = [(design, v, t, column, n, isolated) for v in v_read_values for t in t_ox_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_surface_point, tasks))
    else:
        results = [_surface_point(t) for t in tasks]
    sm = np.full((len(v_read_values), len(t_ox_values)), np.nan)
    reports, failures = {}, {}
    for v, t, rep, err in results:
        i, j = v_read_values.index(v), t_ox_values.index(t)
        if rep is None:
            failures[(v, t)] = err
            log.warning("grid point v_read=%g t_ox=%g failed: %s", v, t, err)
        else:
            sm[i, j] = rep.worst_case_sm
            reports[(v, t)] = rep
    return SmSurface(v_read_values, t_ox_values, sm, reports, failures)


def write_long_csv(path, rows, fields=("v_read", "t_ox", "a", "i_min", "i_max", "sm")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in fields})

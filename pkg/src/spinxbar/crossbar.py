"""Crossbar assembly, biasing and nodal solve.

The array is a graph of two-terminal resistive elements.  Driven lines end
in an ideal source behind a driver (or sense) resistor; source nodes are
Dirichlet nodes, so the remaining nodal system is symmetric positive
definite and is factorized with a sparse direct solver.

Gate lines (WL, RWL/WWL of the FET cells) carry no DC current and are kept
as control voltages rather than nodes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from . import devices as dv
from .errors import ConvergenceError, InvalidParameterError, TopologyError

log = logging.getLogger(__name__)

COMPUTE = "compute"
READ = "read"
WRITE = "write"
HOLD = "hold"
OPERATIONS = (WRITE, READ, COMPUTE, HOLD)

# element kinds
K_LINE, K_DRIVER, K_SENSE, K_CHANNEL, K_SERIES, K_MTJ, K_FET, K_METAL = range(8)
_KIND_PREFIX = {K_LINE: "RLINE", K_DRIVER: "RDRV", K_SENSE: "RSNS", K_CHANNEL: "RCH", K_SERIES: "RARM", K_MTJ: "RMTJ", K_FET: "RFET", K_METAL: "RHM"}

# line layout per topology: (name, orientation, role)
LINES = {
    dv.VSH: (("RWLA", "row", "driven"), ("RWLB", "row", "driven"), ("BL", "col", "sensed"), ("BLB", "col", "driven")),
    dv.STT: (("BL", "col", "sensed"), ("SL", "col", "driven")),
    dv.SOT: (("BL", "col", "sensed"), ("SL", "col", "driven")),
}
CONTROL_LINES = {dv.VSH: ("WL",), dv.STT: ("WL1", "WL2"), dv.SOT: ("RWL1", "RWL2", "WWL1", "WWL2")}


@dataclass(frozen=True)
class ArrayGeometry:
    rows: int
    cols: int
    topology: str = dv.VSH
    line_resistance_per_cell: float = 2.0
    line_capacitance_per_cell: float = 0.2e-15
    r_driver: float = 500.0
    r_sense: float = 100.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidParameterError("array needs at least one row and one column")
        if self.r_driver < 0 or self.r_sense < 0 or self.line_resistance_per_cell < 0:
            raise InvalidParameterError("parasitic resistances must be non-negative")
        if self.topology not in dv.TOPOLOGIES:
            raise InvalidParameterError(f"unknown topology {self.topology!r}")

    @property
    def taps_per_col(self) -> int:
        """Column-line taps: one per VSH cell, two per FET-based XNOR cell."""
        return self.rows if self.topology == dv.VSH else 2 * self.rows


@dataclass(frozen=True)
class BiasScheme:
    vdd: float = 0.9
    v_read: float = 0.4

    def __post_init__(self):
        if not 0 < self.v_read <= self.vdd:
            raise InvalidParameterError("need 0 < v_read <= vdd")


@dataclass(frozen=True)
class WriteTarget:
    """One write cycle: a row, per-column targets (+1/-1, 0 = untouched)."""

    row: int
    weights: tuple
    cycle: int = 1  # FET cells: 1 writes bit-cell 1, 2 writes bit-cell 2


class ArrayNetwork:
    """Element graph for a rows x cols XNOR array.

    Node naming is deterministic: ``LINE[tap,col]`` / ``LINE[row,tap]`` for
    line taps, ``SRC:LINE[i]`` for line sources and ``NODE[row,col]`` for
    cell-internal nodes.
    """

    def __init__(self, geometry: ArrayGeometry, weights, cell_devices: dv.CellDevices, reduced: bool = True):
        w = np.asarray(weights)
        if w.shape != (geometry.rows, geometry.cols):
            raise InvalidParameterError(f"weights shape {w.shape} does not match array {geometry.rows}x{geometry.cols}")
        if not np.all(np.isin(w, (-1, 1))):
            raise InvalidParameterError("weights must be +1/-1")
        self.geometry = geometry
        self.devices = cell_devices
        self.reduced = reduced
        self.weights = w.astype(np.int8)
        self.topology = geometry.topology
        self._build()

    # ------------------------------------------------------------------ build
    def _alloc(self, name, shape):
        n = int(np.prod(shape))
        idx = np.arange(self.n_nodes, self.n_nodes + n).reshape(shape)
        self.n_nodes += n
        self.blocks[name] = idx
        return idx

    def _build(self):
        g = self.geometry
        R, C = g.rows, g.cols
        topo = self.topology
        self.n_nodes = 0
        self.blocks = {}
        self.lines = {}
        # sources first so their indices are small and stable
        sources = []
        for name, orient, role in LINES[topo]:
            count = R if orient == "row" else C
            src = self._alloc(f"SRC:{name}", (count,))
            self.lines[name] = {"orient": orient, "role": role, "src": src}
            sources.append(src)
        self.source_nodes = np.concatenate(sources)
        taps = {}
        for name, orient, role in LINES[topo]:
            shape = (R, C) if orient == "row" else (g.taps_per_col, C)
            taps[name] = self._alloc(name, shape)
            self.lines[name]["taps"] = taps[name]

        proto = dv.build_cell(topo, 1, self.devices, reduced=self.reduced)
        internal = {n: self._alloc(n, (R, C)) for n in proto.internal}

        a, b, kind, rfix, cfrac, gate, mtj, fet_on, fet_off, rr, cc, tag = ([] for _ in range(12))
        rows_idx, cols_idx = np.meshgrid(np.arange(R), np.arange(C), indexing="ij")

        def push(na, nb, k, r_fixed=0.0, frac=0.0, gate_idx=None, mtj_idx=None, ron=0.0, roff=0.0, r_=None, c_=None, t=""):
            na = np.asarray(na).ravel()
            nb = np.asarray(nb).ravel()
            n = na.size
            a.append(na)
            b.append(nb)
            kind.append(np.full(n, k, dtype=np.int8))
            rfix.append(np.broadcast_to(np.asarray(r_fixed, dtype=float), n).copy())
            cfrac.append(np.full(n, frac))
            gate.append(np.full(n, -1, dtype=np.int64) if gate_idx is None else np.asarray(gate_idx).ravel())
            mtj.append(np.full(n, -1, dtype=np.int64) if mtj_idx is None else np.asarray(mtj_idx).ravel())
            fet_on.append(np.full(n, ron))
            fet_off.append(np.full(n, roff))
            rr.append(np.full(n, -1, dtype=np.int64) if r_ is None else np.asarray(r_).ravel())
            cc.append(np.full(n, -1, dtype=np.int64) if c_ is None else np.asarray(c_).ravel())
            tag.extend([t] * n)

        # lines: source -> tap0 through driver/sense, then per-pitch segments
        for name, orient, role in LINES[topo]:
            tp = taps[name]
            src = self.lines[name]["src"]
            kd = K_SENSE if role == "sensed" else K_DRIVER
            rd = g.r_sense if role == "sensed" else g.r_driver
            if orient == "row":
                push(src, tp[:, 0], kd, rd, r_=np.arange(R), t=name)
                seg = g.line_resistance_per_cell
                if C > 1:
                    push(tp[:, :-1], tp[:, 1:], K_LINE, seg, r_=rows_idx[:, 1:], c_=cols_idx[:, 1:], t=name)
            else:
                push(src, tp[0, :], kd, rd, c_=np.arange(C), t=name)
                seg = g.line_resistance_per_cell * (1.0 if topo == dv.VSH else 0.5)
                if tp.shape[0] > 1:
                    rmap = np.repeat(np.arange(R), tp.shape[0] // R)[1:]
                    push(tp[:-1, :], tp[1:, :], K_LINE, seg, r_=np.repeat(rmap[:, None], C, 1), c_=np.broadcast_to(np.arange(C), (tp.shape[0] - 1, C)), t=name)
            self.lines[name]["driver_elem"] = None  # filled below

        # controls
        self.control_names = []
        ctrl = {}
        for cname in CONTROL_LINES[topo]:
            ctrl[cname] = np.arange(len(self.control_names), len(self.control_names) + R)
            self.control_names += [f"{cname}[{r}]" for r in range(R)]
        self.controls = ctrl

        # MTJ bookkeeping: index = (r*C + c)*2 + k
        n_mtj = R * C * 2
        self.mtj_rows = np.repeat(rows_idx.ravel(), 2)
        self.mtj_cols = np.repeat(cols_idx.ravel(), 2)
        self.mtj_slot = np.tile([0, 1], R * C)
        mtj_dev = self.devices.mtj
        self.mtj_rp = np.full(n_mtj, mtj_dev.r_p)
        self.mtj_tmr = np.full(n_mtj, mtj_dev.tmr0)
        self.mtj_vh = np.full(n_mtj, mtj_dev.v_h if mtj_dev.v_h else 0.0)
        self.mtj_ap = np.zeros(n_mtj, dtype=bool)
        self.set_weights(self.weights)

        def term_node(term):
            if topo == dv.VSH:
                m = {"S": "BL", "D": "BLB", "R1": "RWLA", "R2": "RWLB"}
                return taps[m[term]]
            line, k = term[:-1], int(term[-1])
            return taps[line][k - 1 :: 2, :]

        def node_of(name):
            return internal[name] if name in internal else term_node(name)

        cell_slot = {"L": 0, "R": 1, "1": 0, "2": 1}
        base_mtj = (rows_idx * C + cols_idx) * 2
        for el in proto.elements:
            na, nb = node_of(el.a), node_of(el.b)
            gate_idx = None
            if el.gate is not None:
                cname = "WL" if topo == dv.VSH else el.gate
                gate_idx = np.repeat(ctrl[cname][:, None], C, 1)
            mtj_idx = base_mtj + cell_slot[el.mtj] if el.mtj is not None else None
            k = {"channel": K_CHANNEL, "series": K_SERIES, "mtj": K_MTJ, "fet": K_FET, "metal": K_METAL}[el.kind]
            ron = el.fet.r_on if el.fet is not None else 0.0
            roff = el.fet.r_off if el.fet is not None else 0.0
            push(na, nb, k, el.r_fixed, el.channel_fraction, gate_idx, mtj_idx, ron, roff, rows_idx, cols_idx, el.name)

        self.el_a = np.concatenate(a).astype(np.int64)
        self.el_b = np.concatenate(b).astype(np.int64)
        self.el_kind = np.concatenate(kind)
        self.el_rfixed = np.concatenate(rfix)
        self.el_cfrac = np.concatenate(cfrac)
        self.el_gate = np.concatenate(gate)
        self.el_mtj = np.concatenate(mtj)
        self.el_fet_on = np.concatenate(fet_on)
        self.el_fet_off = np.concatenate(fet_off)
        self.el_row = np.concatenate(rr)
        self.el_col = np.concatenate(cc)
        self.el_tag = tag
        self.n_elements = self.el_a.size

        # sense element per column, driver element per source
        src_to_el = {}
        is_src = (self.el_kind == K_DRIVER) | (self.el_kind == K_SENSE)
        for i in np.flatnonzero(is_src):
            src_to_el[int(self.el_a[i])] = int(i)
        self.source_element = np.array([src_to_el[int(s)] for s in self.source_nodes])
        self.sense_elements = np.array([src_to_el[int(s)] for s in self.lines["BL"]["src"]])
        self.has_channel = bool(np.any(self.el_cfrac > 0))
        self._lookup = None

    # ------------------------------------------------------------ accessors
    def set_weights(self, weights):
        w = np.asarray(weights)
        if w.shape != (self.geometry.rows, self.geometry.cols) or not np.all(np.isin(w, (-1, 1))):
            raise InvalidParameterError("weights must be a +1/-1 matrix of the array shape")
        self.weights = w.astype(np.int8)
        first_ap = np.repeat((self.weights.ravel() == -1), 2)
        # slot 0 is AP for W=-1, slot 1 is AP for W=+1
        self.mtj_ap = np.where(self.mtj_slot == 0, first_ap, ~first_ap)

    def set_mtj_states(self, ap_flags):
        self.mtj_ap = np.asarray(ap_flags, dtype=bool).copy()

    def mtj_state(self, row, col, slot) -> str:
        return dv.AP if self.mtj_ap[(row * self.geometry.cols + col) * 2 + slot] else dv.P

    def stored_weights(self) -> np.ndarray:
        """Decode the weight matrix from MTJ states (0 where a cell is not complementary)."""
        ap = self.mtj_ap.reshape(self.geometry.rows, self.geometry.cols, 2)
        out = np.zeros((self.geometry.rows, self.geometry.cols), dtype=np.int8)
        out[~ap[..., 0] & ap[..., 1]] = 1
        out[ap[..., 0] & ~ap[..., 1]] = -1
        return out

    def set_mtj_device(self, mtj: dv.MtjDevice):
        self.mtj_rp[:] = mtj.r_p
        self.mtj_tmr[:] = mtj.tmr0
        self.mtj_vh[:] = mtj.v_h if mtj.v_h else 0.0

    @property
    def node_names(self) -> list:
        names = [None] * self.n_nodes
        for block, idx in self.blocks.items():
            if block.startswith("SRC:"):
                for i, n in enumerate(idx):
                    names[n] = f"{block}[{i}]"
            else:
                for (i, j), n in np.ndenumerate(idx):
                    names[n] = f"{block}[{i},{j}]"
        return names

    def element_name(self, i) -> str:
        r, c = int(self.el_row[i]), int(self.el_col[i])
        loc = f"{r},{c}" if r >= 0 and c >= 0 else str(r if r >= 0 else c)
        return f"{_KIND_PREFIX[int(self.el_kind[i])]}_{self.el_tag[i]}[{loc}]_{i}"

    def element_index(self, tag, row, col) -> int:
        if self._lookup is None:
            cell = np.flatnonzero((self.el_row >= 0) & (self.el_col >= 0) & (self.el_kind != K_LINE))
            self._lookup = {(self.el_tag[i], int(self.el_row[i]), int(self.el_col[i])): int(i) for i in cell}
        try:
            return self._lookup[(tag, row, col)]
        except KeyError:
            raise KeyError(f"no element {tag} at ({row},{col})") from None

    def mtj_element_mask(self):
        return self.el_mtj >= 0


@dataclass
class BiasedNetwork:
    net: ArrayNetwork
    op: str
    source_v: np.ndarray  # NaN marks a floating line
    control_v: np.ndarray
    scheme: BiasScheme
    asserted_rows: tuple = ()
    inputs: tuple = ()
    write_target: WriteTarget | None = None


def _check_pm1(values, what):
    vals = tuple(int(v) for v in values)
    if any(v not in (1, -1) for v in vals):
        raise InvalidParameterError(f"{what} entries must be +1/-1")
    return vals


def apply_bias(
    net: ArrayNetwork,
    scheme: BiasScheme,
    op: str,
    inputs=None,
    asserted_rows=None,
    write_target: WriteTarget | None = None,
) -> BiasedNetwork:
    """Assign line and gate voltages for one operation."""
    if op not in OPERATIONS:
        raise InvalidParameterError(f"unknown operation {op!r}")
    g = net.geometry
    R = g.rows
    vdd, vr = scheme.vdd, scheme.v_read
    topo = net.topology
    src = np.zeros(net.source_nodes.size)
    ctl = np.zeros(len(net.control_names))
    offsets = {}
    pos = 0
    for name, orient, _ in LINES[topo]:
        n = net.lines[name]["src"].size
        offsets[name] = slice(pos, pos + n)
        pos += n

    def line(name):
        return src[offsets[name]]

    asserted = ()
    ins = ()
    if op == READ:
        asserted_rows = tuple(asserted_rows) if asserted_rows is not None else (0,)
        if len(asserted_rows) != 1:
            raise InvalidParameterError("read asserts exactly one row")
        inputs = (1,) if inputs is None else inputs
        op_eff = COMPUTE
    else:
        op_eff = op
    if op_eff == COMPUTE:
        if inputs is None:
            raise InvalidParameterError("compute needs an input vector")
        ins = _check_pm1(inputs, "input")
        asserted = tuple(range(len(ins))) if asserted_rows is None else tuple(int(r) for r in asserted_rows)
        if len(asserted) != len(ins):
            raise InvalidParameterError("inputs length must equal the number of asserted rows")
        if len(set(asserted)) != len(asserted) or any(not 0 <= r < R for r in asserted):
            raise InvalidParameterError("asserted rows must be distinct and in range")
    if op == WRITE and write_target is None:
        raise InvalidParameterError("write needs a write target")

    if topo == dv.VSH:
        src[:] = vdd
        ctl[net.controls["WL"]] = vdd
        if op_eff == COMPUTE:
            for r, x in zip(asserted, ins):
                ctl[net.controls["WL"][r]] = 0.0
                line("RWLA")[r] = vdd - vr if x == 1 else vdd
                line("RWLB")[r] = vdd if x == 1 else vdd - vr
        elif op == WRITE:
            t = write_target
            wts = _check_targets(t, g)
            ctl[net.controls["WL"][t.row]] = 0.0
            line("RWLA")[t.row] = np.nan
            line("RWLB")[t.row] = np.nan
            for c, w in enumerate(wts):
                if w == -1:
                    line("BL")[c], line("BLB")[c] = vdd, 0.0
                elif w == 1:
                    line("BL")[c], line("BLB")[c] = 0.0, vdd
    else:
        # FET cells idle with gates off and BL clamped at V_READ by the sense amplifier
        line("BL")[:] = vr
        if op_eff == COMPUTE:
            on1, on2 = ("WL1", "WL2") if topo == dv.STT else ("RWL1", "RWL2")
            for r, x in zip(asserted, ins):
                ctl[net.controls[on1][r]] = vdd if x == 1 else 0.0
                ctl[net.controls[on2][r]] = 0.0 if x == 1 else vdd
        elif op == WRITE:
            t = write_target
            wts = _check_targets(t, g)
            if t.cycle not in (1, 2):
                raise InvalidParameterError("FET-cell write cycle must be 1 or 2")
            gate = f"WL{t.cycle}" if topo == dv.STT else f"WWL{t.cycle}"
            ctl[net.controls[gate][t.row]] = vdd
            line("BL")[:] = 0.0
            for c, w in enumerate(wts):
                if w == 0:
                    continue
                # bit-cell 1 stores P for +1; bit-cell 2 the complement
                want_p = (w == 1) == (t.cycle == 1)
                line("BL")[c], line("SL")[c] = (vdd, 0.0) if want_p else (0.0, vdd)
    return BiasedNetwork(net, op, src, ctl, scheme, asserted, ins, write_target)


def _check_targets(t: WriteTarget, g: ArrayGeometry):
    if not 0 <= t.row < g.rows:
        raise InvalidParameterError("write row out of range")
    wts = tuple(int(w) for w in t.weights)
    if len(wts) != g.cols or any(w not in (-1, 0, 1) for w in wts):
        raise InvalidParameterError("write targets must be one of -1/0/+1 per column")
    return wts


@dataclass
class SolveResult:
    node_voltages: np.ndarray
    branch_currents: np.ndarray  # a -> b positive
    resistances: np.ndarray
    i_bl: np.ndarray
    iterations: int
    residual: float
    mode: str = "frozen"
    source_currents: np.ndarray = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "i_bl_amps": [float(x) for x in self.i_bl],
            "iterations": self.iterations,
            "residual_amps": self.residual,
            "mode": self.mode,
        }


def element_resistances(bn: BiasedNetwork, v=None, currents=None, prev_r=None) -> np.ndarray:
    """Resistances of every element at an operating point.

    ``v is None`` evaluates bias-dependent parts at their nominal point
    (channel V_GS = V_G - V_DD, zero V_DS and zero MTJ bias).
    """
    net = bn.net
    vdd = bn.scheme.vdd
    r = net.el_rfixed.copy()
    ch = net.el_cfrac > 0
    gate_v = np.where(net.el_gate >= 0, bn.control_v[np.maximum(net.el_gate, 0)], 0.0)
    if ch.any():
        model = net.devices.channel
        if v is None:
            vgs = gate_v[ch] - vdd
            vds = np.zeros(vgs.shape)
        else:
            va, vb = v[net.el_a[ch]], v[net.el_b[ch]]
            vgs = gate_v[ch] - np.maximum(va, vb)
            if currents is None or prev_r is None:
                vds = np.zeros(vgs.shape)
            else:
                # full-channel V_DS equivalent of this segment's drop
                vds = np.abs(currents[ch]) * _channel_part(bn, prev_r)[ch] / net.el_cfrac[ch]
        r_ch = net.el_cfrac[ch] * dv.table_resistance(model, vgs, np.minimum(vds, model.table.v_ds[-1]))
        r[ch] += r_ch
    m = net.el_mtj >= 0
    if m.any():
        idx = net.el_mtj[m]
        if v is None or currents is None or prev_r is None:
            bias = np.zeros(idx.size)
        else:
            r_prev_mtj = dv.mtj_resistance_array(net.mtj_rp[idx], net.mtj_tmr[idx], net.mtj_ap[idx], net.mtj_vh[idx], 0.0)
            bias = np.minimum(np.abs(currents[m]) * r_prev_mtj, 1.5)
        r[m] += dv.mtj_resistance_array(net.mtj_rp[idx], net.mtj_tmr[idx], net.mtj_ap[idx], net.mtj_vh[idx], bias)
    f = net.el_kind == K_FET
    if f.any():
        on = gate_v[f] >= 0.5 * vdd
        r[f] += np.where(on, net.el_fet_on[f], net.el_fet_off[f])
    return r


def _channel_part(bn, r_total):
    """Channel-table share of each element resistance (for V_DS estimates)."""
    net = bn.net
    part = r_total - net.el_rfixed
    m = net.el_mtj >= 0
    if m.any():
        idx = net.el_mtj[m]
        part[m] -= dv.mtj_resistance_array(net.mtj_rp[idx], net.mtj_tmr[idx], net.mtj_ap[idx], net.mtj_vh[idx], 0.0)
    return np.maximum(part, 0.0)


class _System:
    """Conductance matrix split into unknown/fixed node blocks."""

    def __init__(self, bn: BiasedNetwork):
        net = bn.net
        fixed_mask = np.zeros(net.n_nodes, dtype=bool)
        fixed_nodes = net.source_nodes[~np.isnan(bn.source_v)]
        fixed_mask[fixed_nodes] = True
        if not fixed_mask.any():
            raise TopologyError("network has no driven source")
        self.fixed_mask = fixed_mask
        self.fixed = np.flatnonzero(fixed_mask)
        self.unknown = np.flatnonzero(~fixed_mask)
        self.vfix = np.zeros(net.n_nodes)
        self.vfix[net.source_nodes] = np.nan_to_num(bn.source_v)
        pos = np.full(net.n_nodes, -1)
        pos[self.unknown] = np.arange(self.unknown.size)
        self.pos = pos
        a, b = net.el_a, net.el_b
        self.a, self.b = a, b
        n = net.n_nodes
        rows = np.concatenate([a, b, a, b])
        cols = np.concatenate([a, b, b, a])
        self.rows, self.cols = rows, cols
        adj = sp.coo_matrix((np.ones(a.size), (a, b)), shape=(n, n)).tocsr()
        ncomp, labels = connected_components(adj, directed=False)
        has_fixed = np.zeros(ncomp, dtype=bool)
        has_fixed[labels[fixed_mask]] = True
        if not has_fixed.all():
            bad = int(np.sum(~has_fixed[labels]))
            raise TopologyError(f"{bad} node(s) are not connected to any driven source (singular conductance matrix)")

    def matrix(self, g):
        n = self.pos.size
        data = np.concatenate([g, g, -g, -g])
        G = sp.csr_matrix((data, (self.rows, self.cols)), shape=(n, n))
        return G

    def solve(self, g):
        G = self.matrix(g)
        U, F = self.unknown, self.fixed
        Guu = G[U][:, U].tocsc()
        rhs = -(G[U][:, F] @ self.vfix[F])
        try:
            # SPD: symmetric ordering, no pivoting needed
            lu = splu(Guu, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise TopologyError(f"singular conductance matrix: {exc}") from exc
        x = lu.solve(rhs)
        v = self.vfix.copy()
        v[U] = x
        return v, G

    def residual(self, G, v):
        """Max |KCL| over non-source nodes."""
        res = G @ v
        return float(np.max(np.abs(res[self.unknown]))) if self.unknown.size else 0.0


def solve(
    bn: BiasedNetwork,
    tol: float = 1e-12,
    max_iter: int = 50,
    damping: float = 0.5,
    bias_dependent: bool = False,
) -> SolveResult:
    """Nodal solve of a biased network.

    With ``bias_dependent`` the channel and MTJ resistances are re-evaluated
    at the operating point and a damped fixed-point iteration on node
    voltages runs until the KCL residual, evaluated with resistances at the
    current voltages, drops below ``tol``.  Otherwise resistances are frozen
    at their nominal bias and a single linear solve is done.
    """
    sysm = _System(bn)
    r = element_resistances(bn)
    v, G = sysm.solve(1.0 / r)
    iters = 0
    mode = "frozen"
    if bias_dependent and (bn.net.has_channel or np.any(bn.net.mtj_vh > 0)):
        mode = "bias-dependent"
        res = np.inf
        for iters in range(1, max_iter + 1):
            r = element_resistances(bn, v, (v[sysm.a] - v[sysm.b]) / r, r)
            G = sysm.matrix(1.0 / r)
            res = sysm.residual(G, v)
            if res < tol:
                break
            v_lin, _ = sysm.solve(1.0 / r)
            v = v + damping * (v_lin - v)
        else:
            raise ConvergenceError(f"no convergence after {max_iter} iterations (residual {res:.3e} A)", res, max_iter)
    residual = sysm.residual(G, v)
    currents = (v[sysm.a] - v[sysm.b]) / r
    net = bn.net
    i_bl = currents[net.sense_elements]
    src_i = currents[net.source_element]
    return SolveResult(v, currents, r, i_bl, iters, residual, mode, src_i)


def column_current(result: SolveResult, col: int) -> float:
    """Current into column ``col`` through its sense resistor."""
    if not 0 <= col < result.i_bl.size:
        raise IndexError(f"column {col} out of range")
    return float(result.i_bl[col])


def export_netlist(bn: BiasedNetwork, resistances=None) -> str:
    """SPICE-style text: one resistor or source per line."""
    net = bn.net
    names = net.node_names
    r = element_resistances(bn) if resistances is None else resistances
    out = [f"* spinxbar {net.topology} {net.geometry.rows}x{net.geometry.cols} op={bn.op}"]
    for i in range(net.n_elements):
        out.append(f"{net.element_name(i)} {names[net.el_a[i]]} {names[net.el_b[i]]} {r[i]:.9g}")
    for k, node in enumerate(net.source_nodes):
        v = bn.source_v[k]
        if not np.isnan(v):
            out.append(f"V{k} {names[node]} 0 {v:.9g}")
    for name, v in zip(net.control_names, bn.control_v):
        out.append(f"* control {name} = {v:.9g}")
    out.append(".end")
    return "\n".join(out) + "\n"


def parse_netlist(text: str):
    """Read back ``export_netlist`` output as (resistors, sources) lists."""
    resistors, sources = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("*") or line == ".end":
            continue
        name, na, nb, val = line.split()
        (sources if name.startswith("V") else resistors).append((name, na, nb, float(val)))
    return resistors, sources


def build_array(geometry: ArrayGeometry, weights, cell_devices: dv.CellDevices, reduced: bool = True) -> ArrayNetwork:
    return ArrayNetwork(geometry, weights, cell_devices, reduced=reduced)


def expected_element_count(geometry: ArrayGeometry, reduced: bool = True) -> int:
    """Closed-form element count used to cross-check ``build_array``."""
    R, C = geometry.rows, geometry.cols
    per_cell = {dv.VSH: 4 if reduced else 6, dv.STT: 4, dv.SOT: 10}[geometry.topology]
    lines = len(LINES[geometry.topology])
    if geometry.topology == dv.VSH:
        # two row lines (C elements each incl. driver) + two column lines (R each)
        line_els = 2 * R * C + 2 * C * R
    else:
        line_els = lines * C * geometry.taps_per_col
    return per_cell * R * C + line_els

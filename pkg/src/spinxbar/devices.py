"""Parametric electrical models and per-topology cell templates.

Three XNOR cells are supported:

* ``vsh``  one WSe2 spin generator with two MTJs on the channel arms
  (terminals S, D, R1, R2, G).  Reduced to a star around the channel
  center ``X``.
* ``stt``  two stacked 1T-1R STT bit-cells (terminals BL/SL/WL per bit-cell).
* ``sot``  two stacked 2T-1R SOT bit-cells (terminals BL/SL/RWL/WWL per
  bit-cell).

MTJ elements are oriented pinned-layer side -> free-layer side, so a
positive element current flows PL -> FL and favors the AP state.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ExtrapolationError, InvalidParameterError

P = "P"
AP = "AP"

VSH = "vsh"
STT = "stt"
SOT = "sot"
TOPOLOGIES = (VSH, STT, SOT)

# MTJ disturb directions, named after the switching they would cause
P_TO_AP = "P->AP"
AP_TO_P = "AP->P"

DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class MtjDevice:
    area: float  # m^2
    t_ox: float  # m
    ra_product: float  # ohm*um^2 at t_ref
    tmr0: float = 5.0
    state: str = P
    v_h: float | None = None  # TMR halving bias; None disables rolloff
    kappa: float = math.log(10.0) / 0.2e-9  # 1/m
    t_ref: float = 1.3e-9

    def __post_init__(self):
        if self.area <= 0 or self.t_ox <= 0 or self.ra_product <= 0:
            raise InvalidParameterError("MTJ area, oxide thickness and RA product must be positive")
        if self.tmr0 < 0:
            raise InvalidParameterError("tmr0 must be non-negative")
        if self.state not in (P, AP):
            raise InvalidParameterError(f"MTJ state must be 'P' or 'AP', got {self.state!r}")
        if self.v_h is not None and self.v_h <= 0:
            raise InvalidParameterError("v_h must be positive when given")

    @property
    def r_p(self) -> float:
        return self.ra_product * 1e-12 / self.area * math.exp(self.kappa * (self.t_ox - self.t_ref))

    def with_state(self, state: str) -> "MtjDevice":
        return replace(self, state=state)


def mtj_resistance(dev: MtjDevice, bias: float = 0.0) -> float:
    if abs(bias) > 1.5:
        raise InvalidParameterError(f"MTJ bias {bias} V outside the +/-1.5 V model range")
    r_p = dev.r_p
    if dev.state == P:
        return r_p
    if dev.v_h is None:
        return r_p * (1.0 + dev.tmr0)
    return r_p * (1.0 + dev.tmr0 / (1.0 + (bias / dev.v_h) ** 2))


def mtj_resistance_array(r_p, tmr0, is_ap, v_h, bias):
    """Vectorized ``mtj_resistance``; ``v_h <= 0`` disables rolloff."""
    bias = np.abs(bias)
    with np.errstate(divide="ignore", invalid="ignore"):
        roll = np.where(v_h > 0, 1.0 / (1.0 + (bias / np.where(v_h > 0, v_h, 1.0)) ** 2), 1.0)
    return r_p * (1.0 + np.where(is_ap, tmr0 * roll, 0.0))


@dataclass(frozen=True)
class ChannelTable:
    """Channel resistance sampled on a (V_GS, V_DS) grid; ohms[i, j] at (v_gs[i], v_ds[j])."""

    v_gs: tuple
    v_ds: tuple
    ohms: tuple

    def __post_init__(self):
        ohms = np.asarray(self.ohms, dtype=float)
        if ohms.shape != (len(self.v_gs), len(self.v_ds)):
            raise InvalidParameterError("channel table shape does not match its grid")
        if np.any(ohms <= 0):
            raise InvalidParameterError("channel resistances must be positive")
        if np.any(np.diff(self.v_gs) <= 0) or np.any(np.diff(self.v_ds) <= 0):
            raise InvalidParameterError("channel table grid must be strictly increasing")

    @classmethod
    def from_csv(cls, path) -> "ChannelTable":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                rows.append((float(rec["v_gs"]), float(rec["v_ds"]), float(rec["ohms"])))
        v_gs = sorted({r[0] for r in rows})
        v_ds = sorted({r[1] for r in rows})
        grid = np.full((len(v_gs), len(v_ds)), np.nan)
        for g, d, r in rows:
            grid[v_gs.index(g), v_ds.index(d)] = r
        if np.isnan(grid).any():
            raise InvalidParameterError(f"{path}: channel table is not a full rectangular grid")
        return cls(tuple(v_gs), tuple(v_ds), tuple(map(tuple, grid)))

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["v_gs", "v_ds", "ohms"])
            for i, g in enumerate(self.v_gs):
                for j, d in enumerate(self.v_ds):
                    w.writerow([repr(g), repr(d), repr(self.ohms[i][j])])


def default_channel_table(r_on: float = 10e3, r_off: float = 5e9) -> ChannelTable:
    """Shipped p-type WSe2 channel table (engineering placeholder).

    ``r_on`` at V_GS = -0.9 V, V_DS = 0; strongly off for V_GS >= 0.  A mild
    quasi-saturation term raises R with V_DS.
    """
    v_gs = (-1.0, -0.9, -0.75, -0.6, -0.45, -0.3, -0.15, 0.0, 0.3, 0.6, 0.9, 1.0)
    v_ds = (0.0, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0)
    v_t = -0.2
    grid = []
    for g in v_gs:
        overdrive = v_t - g  # positive when on
        row = []
        for d in v_ds:
            if overdrive > 0:
                r = r_on * (0.7 / overdrive) * (1.0 + 0.25 * min(d, overdrive) / overdrive)
                r = min(r, r_off)
            else:
                r = r_off * math.exp(min(-overdrive, 1.0) * 4.0)
            row.append(float(f"{r:.6g}"))
        grid.append(tuple(row))
    return ChannelTable(v_gs, v_ds, tuple(grid))


@dataclass(frozen=True)
class VshChannelModel:
    theta_sh: float = 1.5  # placeholder, WSe2 VSH angle
    lambda_s: float = 100e-9  # placeholder, spin diffusion length
    arm_length: float = 30e-9
    table: ChannelTable = field(default_factory=default_channel_table)
    r_contact: float = 1e3  # Schottky contact, ohm
    source_fraction: float = 0.5  # share of the S-D channel between S (or D) and the center
    arm_fraction: float = 0.5  # arm channel resistance relative to the S-D channel

    def __post_init__(self):
        if self.theta_sh < 0 or self.lambda_s <= 0 or self.arm_length < 0 or self.r_contact < 0:
            raise InvalidParameterError("invalid VSH channel parameters")
        if not 0 < self.source_fraction <= 1 or self.arm_fraction < 0:
            raise InvalidParameterError("invalid channel geometry fractions")

    def interpolator(self) -> RegularGridInterpolator:
        return _interp_cache(self.table)


_INTERPS: dict = {}


def _interp_cache(table: ChannelTable) -> RegularGridInterpolator:
    key = id(table)
    hit = _INTERPS.get(key)
    if hit is None or hit[0] is not table:
        interp = RegularGridInterpolator(
            (np.asarray(table.v_gs), np.asarray(table.v_ds)), np.asarray(table.ohms, dtype=float), method="linear"
        )
        hit = (table, interp)
        _INTERPS[key] = hit
    return hit[1]


def table_resistance(model: VshChannelModel, v_gs, v_ds) -> np.ndarray:
    """Bilinear table lookup without the contact term; raises outside the hull."""
    v_gs = np.asarray(v_gs, dtype=float)
    v_ds = np.abs(np.asarray(v_ds, dtype=float))
    t = model.table
    tol = 1e-12
    if (
        np.any(v_gs < t.v_gs[0] - tol)
        or np.any(v_gs > t.v_gs[-1] + tol)
        or np.any(v_ds > t.v_ds[-1] + tol)
    ):
        raise ExtrapolationError(
            f"channel query outside table hull V_GS in [{t.v_gs[0]}, {t.v_gs[-1]}], V_DS in [0, {t.v_ds[-1]}]"
        )
    pts = np.stack(
        [np.clip(v_gs, t.v_gs[0], t.v_gs[-1]), np.clip(v_ds, t.v_ds[0], t.v_ds[-1])], axis=-1
    )
    return model.interpolator()(pts).reshape(np.broadcast(v_gs, v_ds).shape)


def channel_resistance(model: VshChannelModel, v_gs: float, v_ds: float) -> float:
    """Source-to-drain channel resistance: table value plus the series contact."""
    return float(table_resistance(model, v_gs, v_ds)) + model.r_contact


@dataclass(frozen=True)
class SpinSplit:
    i_s_left: float
    i_s_right: float
    pol_left: tuple
    pol_right: tuple


def charge_to_spin(model: VshChannelModel, i_charge: float, direction: int) -> SpinSplit:
    """Spin currents injected into the two arms for a channel charge current.

    ``direction`` is +1 for S -> D flow, which drives the left free layer
    down and the right one up; -1 reverses both.
    """
    if direction not in (1, -1):
        raise InvalidParameterError("direction must be +1 (S->D) or -1 (D->S)")
    mag = model.theta_sh * abs(i_charge) * math.exp(-model.arm_length / model.lambda_s)
    left = (0.0, 0.0, -float(direction))
    right = (0.0, 0.0, float(direction))
    return SpinSplit(mag, mag, left, right)


@dataclass(frozen=True)
class AccessTransistor:
    n_fin: int = 1
    r_on_per_fin: float = 25e3
    r_off: float = 1e11
    state: str = "on"

    def __post_init__(self):
        if self.n_fin < 1 or self.r_on_per_fin <= 0:
            raise InvalidParameterError("invalid access transistor")
        if self.r_off < 1e5 * self.r_on:
            raise InvalidParameterError("r_off must be at least 1e5 x r_on")

    @property
    def r_on(self) -> float:
        return self.r_on_per_fin / self.n_fin

    @property
    def resistance(self) -> float:
        return self.r_on if self.state == "on" else self.r_off


@dataclass(frozen=True)
class HeavyMetal:
    """Tungsten SOT track under an in-plane free layer."""

    sheet_resistance: float = 100.0  # ohm/sq (placeholder)
    length: float = 75e-9  # along the write current
    width: float = 25e-9
    thickness: float = 3e-9
    theta_sh: float = 0.3  # placeholder
    lambda_sf: float = 1.5e-9

    @property
    def resistance(self) -> float:
        return self.sheet_resistance * self.length / self.width

    def spin_current(self, i_charge: float) -> float:
        gain = self.theta_sh * (self.length / self.thickness) * (1.0 - 1.0 / math.cosh(self.thickness / self.lambda_sf))
        return gain * abs(i_charge)


# ---------------------------------------------------------------- cell templates


@dataclass(frozen=True)
class CellElement:
    name: str
    a: str
    b: str
    kind: str  # channel | mtj | fet | metal | series
    mtj: str | None = None  # "L"/"R" for VSH, "1"/"2" for STT/SOT
    channel_fraction: float = 0.0
    r_fixed: float = 0.0
    gate: str | None = None
    fet: AccessTransistor | None = None


@dataclass(frozen=True)
class CellDevices:
    """Everything needed to instantiate one XNOR cell of a topology."""

    mtj: MtjDevice
    channel: VshChannelModel | None = None
    transistor: AccessTransistor | None = None
    write_transistor: AccessTransistor | None = None
    heavy_metal: HeavyMetal | None = None


@dataclass(frozen=True)
class CellNetwork:
    topology: str
    weight: int
    terminals: tuple
    controls: tuple
    internal: tuple
    elements: tuple
    mtjs: dict

    def mtj_states(self) -> tuple:
        return tuple(self.mtjs[k].state for k in sorted(self.mtjs))

    def is_connected(self) -> bool:
        """Every internal node reaches a non-control terminal (nothing floats)."""
        ports = set(self.terminals) - set(self.controls)
        adj = {n: set() for n in ports | set(self.internal)}
        for el in self.elements:
            adj[el.a].add(el.b)
            adj[el.b].add(el.a)
        seen = set(ports)
        stack = list(ports)
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return set(self.internal) <= seen


TERMINALS = {
    VSH: ("S", "D", "R1", "R2", "G"),
    STT: ("BL1", "SL1", "WL1", "BL2", "SL2", "WL2"),
    SOT: ("BL1", "SL1", "RWL1", "WWL1", "BL2", "SL2", "RWL2", "WWL2"),
}
CONTROLS = {VSH: ("G",), STT: ("WL1", "WL2"), SOT: ("RWL1", "WWL1", "RWL2", "WWL2")}


def weight_states(topology: str, weight: int) -> dict:
    """Complementary MTJ encoding of a signed weight.

    VSH: +1 -> (L, R) = (P, AP).  STT/SOT: +1 -> bit-cell 1 P, bit-cell 2 AP.
    """
    if weight not in (1, -1):
        raise InvalidParameterError(f"weight must be +1 or -1, got {weight!r}")
    first, second = (P, AP) if weight == 1 else (AP, P)
    return {"L": first, "R": second} if topology == VSH else {"1": first, "2": second}


def build_cell(topology: str, weight: int, devices: CellDevices, reduced: bool = True) -> CellNetwork:
    """Instantiate one XNOR cell with MTJ states set from ``weight``.

    ``reduced`` merges series chains (arm channel + contact + MTJ) into one
    element; the unreduced form keeps the MTJ as its own element.
    """
    if topology not in TOPOLOGIES:
        raise InvalidParameterError(f"unknown topology {topology!r}")
    states = weight_states(topology, weight)
    mtjs = {k: devices.mtj.with_state(s) for k, s in states.items()}
    els = []
    internal = []
    if topology == VSH:
        ch = devices.channel
        if ch is None:
            raise InvalidParameterError("VSH cell needs a channel model")
        internal.append("X")
        els.append(CellElement("RS", "S", "X", "channel", channel_fraction=ch.source_fraction, r_fixed=ch.r_contact / 2, gate="G"))
        els.append(CellElement("RD", "D", "X", "channel", channel_fraction=ch.source_fraction, r_fixed=ch.r_contact / 2, gate="G"))
        for side, node in (("L", "R1"), ("R", "R2")):
            if reduced:
                els.append(CellElement(f"ARM_{side}", node, "X", "series", mtj=side, channel_fraction=ch.arm_fraction, r_fixed=ch.r_contact, gate="G"))
            else:
                mid = f"M{side}"
                internal.append(mid)
                els.append(CellElement(f"MTJ_{side}", node, mid, "mtj", mtj=side))
                els.append(CellElement(f"ARM_{side}", mid, "X", "channel", channel_fraction=ch.arm_fraction, r_fixed=ch.r_contact, gate="G"))
    elif topology == STT:
        t = devices.transistor
        if t is None:
            raise InvalidParameterError("STT cell needs an access transistor")
        for k in ("1", "2"):
            internal.append(f"M{k}")
            # PL side at the transistor, FL side at BL
            els.append(CellElement(f"MTJ{k}", f"M{k}", f"BL{k}", "mtj", mtj=k))
            els.append(CellElement(f"T{k}", f"M{k}", f"SL{k}", "fet", gate=f"WL{k}", fet=t))
    else:
        tr, tw, hm = devices.transistor, devices.write_transistor or devices.transistor, devices.heavy_metal
        if tr is None or hm is None:
            raise InvalidParameterError("SOT cell needs transistors and a heavy-metal track")
        half = hm.resistance / 2
        for k in ("1", "2"):
            internal += [f"T{k}", f"H{k}", f"A{k}"]
            els.append(CellElement(f"TR{k}", f"BL{k}", f"T{k}", "fet", gate=f"RWL{k}", fet=tr))
            els.append(CellElement(f"MTJ{k}", f"T{k}", f"H{k}", "mtj", mtj=k))
            els.append(CellElement(f"HMB{k}", f"H{k}", f"SL{k}", "metal", r_fixed=half))
            els.append(CellElement(f"TW{k}", f"BL{k}", f"A{k}", "fet", gate=f"WWL{k}", fet=tw))
            els.append(CellElement(f"HMA{k}", f"A{k}", f"H{k}", "metal", r_fixed=half))
    return CellNetwork(
        topology=topology,
        weight=weight,
        terminals=TERMINALS[topology],
        controls=CONTROLS[topology],
        internal=tuple(internal),
        elements=tuple(els),
        mtjs=mtjs,
    )

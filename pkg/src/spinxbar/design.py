"""A complete per-topology design point: devices, magnet, bias and solver settings."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import crossbar as cb
from . import devices as dv
from .errors import InvalidParameterError
from .magnet import MagnetParams, critical_current


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12
    max_iter: int = 50
    damping: float = 0.5
    bias_dependent: bool = False

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1 or not 0 < self.damping <= 1:
            raise InvalidParameterError("invalid solver settings")


@dataclass(frozen=True)
class WriteSettings:
    horizon: float = 200e-9
    step: float = 1e-12
    tilt_deg: float = 1.0
    threshold: float = 0.9
    pulse_margin: float = 0.2


@dataclass(frozen=True)
class Design:
    topology: str
    cell: dv.CellDevices
    magnet: MagnetParams
    efficiency: float
    scheme: cb.BiasScheme = field(default_factory=cb.BiasScheme)
    rows: int = 64
    cols: int = 64
    group_size: int = 8
    line_resistance_per_cell: float = 2.0
    line_capacitance_per_cell: float = 0.2e-15
    r_driver: float = 500.0
    r_sense: float = 100.0
    solver: SolverSettings = field(default_factory=SolverSettings)
    write: WriteSettings = field(default_factory=WriteSettings)
    # per-direction multipliers on the analytic threshold
    i_cr_scale: tuple = ((dv.AP_TO_P, 1.0), (dv.P_TO_AP, 1.0))

    def __post_init__(self):
        if self.topology not in dv.TOPOLOGIES:
            raise InvalidParameterError(f"unknown topology {self.topology!r}")
        if self.group_size < 1:
            raise InvalidParameterError("group size must be at least 1")

    def geometry(self, rows: int | None = None, cols: int | None = None) -> cb.ArrayGeometry:
        return cb.ArrayGeometry(
            rows=self.rows if rows is None else rows,
            cols=self.cols if cols is None else cols,
            topology=self.topology,
            line_resistance_per_cell=self.line_resistance_per_cell,
            line_capacitance_per_cell=self.line_capacitance_per_cell,
            r_driver=self.r_driver,
            r_sense=self.r_sense,
        )

    def build(self, weights, reduced: bool = True) -> cb.ArrayNetwork:
        w = np.asarray(weights)
        if w.ndim == 1:
            w = w[:, None]
        return cb.build_array(self.geometry(*w.shape), w, self.cell, reduced=reduced)

    def solve(self, bn: cb.BiasedNetwork) -> cb.SolveResult:
        s = self.solver
        return cb.solve(bn, tol=s.tol, max_iter=s.max_iter, damping=s.damping, bias_dependent=s.bias_dependent)

    def critical_currents(self) -> dict:
        """Disturb thresholds per switching direction (amps)."""
        base = critical_current(self.magnet, self.efficiency)
        return {k: base * v for k, v in self.i_cr_scale}

    def with_v_read(self, v_read: float) -> "Design":
        return replace(self, scheme=replace(self.scheme, v_read=v_read))

    def with_t_ox(self, t_ox: float) -> "Design":
        return replace(self, cell=replace(self.cell, mtj=replace(self.cell.mtj, t_ox=t_ox)))

    def with_size(self, rows: int, cols: int) -> "Design":
        return replace(self, rows=rows, cols=cols)

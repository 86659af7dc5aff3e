"""Experiment configuration: YAML schema, defaults and object construction.

A user file is deep-merged over the shipped ``data/default.yaml``, so it
only needs the keys it changes.  Unknown keys are rejected.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import crossbar as cb
from . import devices as dv
from .cost import CellLayout, CostParams, LayoutTemplate
from .design import Design, SolverSettings, WriteSettings
from .errors import ConfigurationError, InvalidParameterError
from .magnet import MagnetParams

DEFAULT_PATH = dv.DATA_DIR / "default.yaml"
NM = 1e-9


def load_default() -> dict:
    with open(DEFAULT_PATH, encoding="utf-8") as fh:
        return yaml.safe_load(fh)


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        path = f"{where}.{k}" if where else k
        if k not in base:
            raise ConfigurationError(f"unknown configuration key {path!r}")
        if isinstance(v, dict) and isinstance(base[k], dict):
            out[k] = _merge(base[k], v, path)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigurationError(f"missing key {where}.{key}")
    return d[key]


def _magnet(m: dict) -> MagnetParams:
    return MagnetParams(
        length=m["length_nm"] * NM,
        width=m["width_nm"] * NM,
        thickness=m["thickness_nm"] * NM,
        ms=float(m["ms_emu_cm3"]),
        k_u=float(m["k_u_erg_cm3"]),
        alpha=float(m["alpha"]),
        gamma=float(m["gamma_mhz_oe"]),
        anisotropy_axis=m["anisotropy_axis"],
        temperature=float(m["temperature_kelvin"]),
        demag_field=float(m["demag_field_oe"]),
    )


def _mtj(m: dict) -> dv.MtjDevice:
    return dv.MtjDevice(
        area=m["length_nm"] * NM * m["width_nm"] * NM,
        t_ox=m["t_ox_nm"] * NM,
        ra_product=float(m["ra_ohm_um2"]),
        tmr0=float(m["tmr0"]),
        v_h=None if m["v_h_volts"] is None else float(m["v_h_volts"]),
        kappa=float(m["kappa_per_nm"]) / NM,
        t_ref=m["t_ref_nm"] * NM,
    )


def _fet(t: dict) -> dv.AccessTransistor:
    return dv.AccessTransistor(n_fin=int(t["n_fin"]), r_on_per_fin=float(t["r_on_per_fin_ohms"]), r_off=float(t["r_off_ohms"]))


def _resolve(name: str, base_dir: Path | None) -> Path:
    p = Path(name)
    candidates = [p] if p.is_absolute() else ([base_dir / p] if base_dir else []) + [dv.DATA_DIR / p]
    for c in candidates:
        if c.exists():
            return c
    raise ConfigurationError(f"referenced file {name!r} not found")


def _channel(c: dict, base_dir: Path | None) -> dv.VshChannelModel:
    return dv.VshChannelModel(
        theta_sh=float(c["theta_sh"]),
        lambda_s=c["lambda_s_nm"] * NM,
        arm_length=c["arm_length_nm"] * NM,
        table=dv.ChannelTable.from_csv(_resolve(c["table_csv"], base_dir)),
        r_contact=float(c["r_contact_ohms"]),
        source_fraction=float(c["source_fraction"]),
        arm_fraction=float(c["arm_fraction"]),
    )


def _heavy_metal(h: dict) -> dv.HeavyMetal:
    return dv.HeavyMetal(
        sheet_resistance=float(h["sheet_resistance_ohms"]),
        length=h["length_nm"] * NM,
        width=h["width_nm"] * NM,
        thickness=h["thickness_nm"] * NM,
        theta_sh=float(h["theta_sh"]),
        lambda_sf=h["lambda_sf_nm"] * NM,
    )


@dataclass
class ExperimentConfig:
    data: dict
    base_dir: Path | None = None
    designs: dict = field(init=False)
    layout: LayoutTemplate = field(init=False)
    cost: CostParams = field(init=False)

    def __post_init__(self):
        try:
            self._build()
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidParameterError):
                raise ConfigurationError(f"invalid configuration: {exc}") from exc
            raise ConfigurationError(f"malformed configuration: {exc!r}") from exc

    def _build(self):
        d = self.data
        a, s, w, b = d["array"], d["solver"], d["write"], d["bias"]
        solver = SolverSettings(float(s["tol_amps"]), int(s["max_iter"]), float(s["damping"]), bool(s["bias_dependent"]))
        write = WriteSettings(
            float(w["horizon_seconds"]),
            float(w["step_seconds"]),
            float(w["tilt_degrees"]),
            float(w["switch_threshold"]),
            float(w["pulse_margin"]),
        )
        if a["rows"] % a["group_size"]:
            raise ConfigurationError("array.group_size must divide array.rows")
        if self.adc_mode not in ("isolated", "in-situ"):
            raise ConfigurationError(f"adc.mode must be isolated or in-situ, got {self.adc_mode!r}")
        self.designs = {}
        for topo, blk in d["designs"].items():
            if topo not in dv.TOPOLOGIES:
                raise ConfigurationError(f"unknown design {topo!r}")
            mtj = _mtj(_need(blk, "mtj", f"designs.{topo}"))
            if topo == dv.VSH:
                cell = dv.CellDevices(mtj=mtj, channel=_channel(blk["channel"], self.base_dir))
            elif topo == dv.STT:
                cell = dv.CellDevices(mtj=mtj, transistor=_fet(blk["transistor"]))
            else:
                cell = dv.CellDevices(
                    mtj=mtj,
                    transistor=_fet(blk["transistor"]),
                    write_transistor=_fet(blk["write_transistor"]),
                    heavy_metal=_heavy_metal(blk["heavy_metal"]),
                )
            scale = blk["i_cr_scale"]
            self.designs[topo] = Design(
                topology=topo,
                cell=cell,
                magnet=_magnet(blk["magnet"]),
                efficiency=float(blk["efficiency"]),
                scheme=cb.BiasScheme(float(b["vdd_volts"]), float(blk["v_read_volts"])),
                rows=int(a["rows"]),
                cols=int(a["cols"]),
                group_size=int(a["group_size"]),
                line_resistance_per_cell=float(a["line_resistance_per_cell_ohms"]),
                line_capacitance_per_cell=float(a["line_capacitance_per_cell_farads"]),
                r_driver=float(a["r_driver_ohms"]),
                r_sense=float(a["r_sense_ohms"]),
                solver=solver,
                write=write,
                i_cr_scale=((dv.AP_TO_P, float(scale["ap_to_p"])), (dv.P_TO_AP, float(scale["p_to_ap"]))),
            )
        lay = d["layout"]
        self.layout = LayoutTemplate(
            gate_pitch=lay["gate_pitch_nm"] * NM,
            fin_pitch=lay["fin_pitch_nm"] * NM,
            metal_pitch=lay["metal_pitch_nm"] * NM,
            cells=tuple(
                (t, CellLayout(int(c["width_gp"]), int(c["height_tracks"]), c["height_unit"], int(c["bitcells"])))
                for t, c in lay["cells"].items()
            ),
        )
        c = d["cost"]
        self.cost = CostParams(
            c_gate_per_fin=float(c["c_gate_per_fin_farads"]),
            c_drain_per_fin=float(c["c_drain_per_fin_farads"]),
            c_vsh_gate=float(c["c_vsh_gate_farads"]),
            c_vsh_contact=float(c["c_vsh_contact_farads"]),
            t_sense=float(c["t_sense_seconds"]),
            settle_factor=float(c["settle_factor"]),
        )
        for v in self.v_read_grid + self.t_ox_grid:
            if not math.isfinite(v) or v <= 0:
                raise ConfigurationError("sweep grid values must be positive")

    # ---------------------------------------------------------- accessors
    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def adc_mode(self) -> str:
        return self.data["adc"]["mode"]

    @property
    def adc_noise(self) -> float:
        return float(self.data["adc"]["noise_amps"])

    @property
    def v_read_grid(self) -> list:
        return [float(v) for v in self.data["sweeps"]["v_read_volts"]]

    @property
    def t_ox_grid(self) -> list:
        """Oxide thicknesses in meters."""
        return [float(t) * NM for t in self.data["sweeps"]["t_ox_nm"]]

    @property
    def sweep_column(self) -> int:
        return int(self.data["sweeps"]["column"])

    def design(self, topology: str) -> Design:
        try:
            return self.designs[topology]
        except KeyError:
            raise ConfigurationError(f"no design configured for {topology!r}") from None

    # ------------------------------------------------------ serialization
    @classmethod
    def from_dict(cls, over: dict | None = None, base_dir: Path | None = None) -> "ExperimentConfig":
        data = load_default()
        if over:
            if not isinstance(over, dict):
                raise ConfigurationError("configuration root must be a mapping")
            data = _merge(data, over)
        return cls(data, base_dir)

    @classmethod
    def load(cls, path=None) -> "ExperimentConfig":
        if path is None:
            return cls.from_dict()
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                over = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: not valid YAML: {exc}") from exc
        return cls.from_dict(over, path.parent)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def dumps(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=False)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

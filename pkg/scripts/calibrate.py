"""Reproduce the [calibrated] values in the shipped default.yaml.

Each step prints the scan it ran and the value it picked.  Nothing is written
back unless ``--write-channel`` is given, in which case the regenerated VSH
channel table replaces the packaged CSV.

    python3 scripts/calibrate.py              # magnets, STT/SOT RA, quick VSH scan
    python3 scripts/calibrate.py --full-vsh   # wider VSH scan (several minutes)
"""
from __future__ import annotations

import argparse
import itertools
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from spinxbar import analysis as an
from spinxbar import devices as dv
from spinxbar.config import ExperimentConfig
from spinxbar.magnet import critical_current

PKG_DATA = Path(__file__).resolve().parents[1] / "src" / "spinxbar" / "data"


def fit_efficiency(cfg, target):
    m = cfg.design(dv.VSH).magnet
    eta = brentq(lambda e: critical_current(m, e) - target, 0.05, 1.0)
    print(f"efficiency: {eta:.4f} -> I_c0 {critical_current(m, round(eta, 3)) * 1e6:.3f} uA")
    return eta


def fit_demag(cfg, target):
    d = cfg.design(dv.SOT)
    h = brentq(lambda hd: critical_current(replace(d.magnet, demag_field=hd), d.efficiency) - target, 0.0, 1e5)
    print(f"SOT demag field: {h:.0f} Oe -> I_c0 {critical_current(replace(d.magnet, demag_field=round(h)), d.efficiency) * 1e6:.3f} uA")
    return h


def scan_ra(topo, values, target):
    print(f"{topo} RA scan (target RDM {target} %)")
    best = None
    for ra in values:
        cfg = ExperimentConfig.from_dict({"designs": {topo: {"mtj": {"ra_ohm_um2": ra}}}})
        d = cfg.design(topo)
        rdm = an.design_rdm(d).rdm
        sm = an.sense_margin_sweep(d).worst_case_sm
        print(f"  RA {ra:6.1f}  RDM {rdm:6.2f} %  SM {sm * 1e6:6.3f} uA")
        if best is None or abs(rdm - target) < abs(best[1] - target):
            best = (ra, rdm)
    print(f"  -> RA {best[0]}")
    return best[0]


def scan_vsh(r_on_values, contact_values, ra_values, t_ox_nm, target_sm, tmp: Path):
    """SM is linear in V_READ in the frozen solve, so the T_OX trend at the
    operating V_READ decides grid monotonicity."""
    print(f"VSH scan: worst-case SM (uA) at T_OX {t_ox_nm} nm, target {target_sm} uA, falling in T_OX")
    rows = []
    for r_on in r_on_values:
        table = tmp / f"ch{int(r_on)}.csv"
        dv.default_channel_table(r_on=r_on).to_csv(table)
        for rc, ra in itertools.product(contact_values, ra_values):
            over = {"mtj": {"ra_ohm_um2": ra}, "channel": {"r_contact_ohms": rc, "table_csv": str(table)}}
            d = ExperimentConfig.from_dict({"designs": {dv.VSH: over}}).design(dv.VSH)
            sm = np.array([an.sense_margin_sweep(d.with_t_ox(t * 1e-9)).worst_case_sm for t in t_ox_nm]) * 1e6
            mono = bool(np.all(np.diff(sm) <= 0))
            at_op = sm[list(t_ox_nm).index(1.3)] if 1.3 in t_ox_nm else float("nan")
            rows.append((r_on, rc, ra, at_op, mono))
            print(f"  r_on {r_on:7.0f}  contact {rc:6.0f}  RA {ra:5.1f}  " + " ".join(f"{s:6.3f}" for s in sm) + ("  monotone" if mono else ""))
    ok = [r for r in rows if r[4] and r[3] >= 1.0]
    if not ok:
        print("  -> no candidate is monotone with SM >= 1 uA")
        return None
    best = min(ok, key=lambda r: abs(r[3] - target_sm))
    print(f"  -> r_on {best[0]:.0f}, contact {best[1]:.0f}, RA {best[2]} (SM {best[3]:.3f} uA)")
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ic-pma-ua", type=float, default=14.2)
    p.add_argument("--ic-sot-ua", type=float, default=54.7)
    p.add_argument("--rdm-stt", type=float, default=88.1)
    p.add_argument("--rdm-sot", type=float, default=80.0)
    p.add_argument("--sm-ua", type=float, default=1.12)
    p.add_argument("--full-vsh", action="store_true", help="scan r_on and contact as well as RA")
    p.add_argument("--write-channel", action="store_true", help="overwrite the packaged channel CSV with the chosen r_on")
    args = p.parse_args(argv)

    cfg = ExperimentConfig.from_dict()
    fit_efficiency(cfg, args.ic_pma_ua * 1e-6)
    fit_demag(cfg, args.ic_sot_ua * 1e-6)
    scan_ra(dv.STT, (40.0, 60.0, 80.0, 100.0), args.rdm_stt)
    scan_ra(dv.SOT, (8.0, 10.0, 12.0, 16.0), args.rdm_sot)
    with tempfile.TemporaryDirectory() as tmp:
        if args.full_vsh:
            best = scan_vsh((5e3, 10e3, 20e3), (500.0, 1e3, 5e3), (28.0, 50.0, 80.0), (1.1, 1.2, 1.3, 1.4, 1.5), args.sm_ua, Path(tmp))
        else:
            best = scan_vsh((10e3,), (1e3,), (45.0, 50.0, 55.0), (1.1, 1.2, 1.3, 1.4, 1.5), args.sm_ua, Path(tmp))
    if best and args.write_channel:
        dv.default_channel_table(r_on=best[0]).to_csv(PKG_DATA / "vsh_channel.csv")
        print(f"wrote {PKG_DATA / 'vsh_channel.csv'}")


if __name__ == "__main__":
    main()

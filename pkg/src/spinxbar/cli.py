"""Command-line front end.

Exit codes: 0 success, 1 analysis diagnostic (SM below threshold, partial
write), 2 validation or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from . import cost
from . import crossbar as cb
from . import devices as dv
from . import imc
from . import io as sio
from .config import ExperimentConfig
from .errors import InvalidParameterError, PartialWriteError, SpinXbarError

log = logging.getLogger("spinxbar")

EXIT_OK, EXIT_DIAGNOSTIC, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


def _topologies(args, default=dv.TOPOLOGIES):
    return (args.topology,) if args.topology else default


def cmd_program(args, cfg: ExperimentConfig) -> int:
    w = sio.read_pm1_csv(args.weights)
    design = cfg.design(args.topology or dv.VSH).with_size(*w.shape)
    net = design.build(-np.ones_like(w))  # fresh array: every cell holds -1
    try:
        rep = imc.program_weights(design, net, w)
        code = EXIT_OK
    except PartialWriteError as exc:
        rep = exc.report
        code = EXIT_DIAGNOSTIC
        log.error("%s", exc)
    sio.write_json(args.out / "write_report.json", rep.as_dict())
    sio.write_rows(args.out / "write_cells.csv", [c.__dict__ for c in rep.per_cell])
    print(f"{design.topology}: {rep.cycles_used} write cycles, success={rep.success}")
    return code


def cmd_mac(args, cfg: ExperimentConfig) -> int:
    w = sio.read_pm1_csv(args.weights)
    x = sio.read_vector_csv(args.inputs)
    if x.size != w.shape[0]:
        raise InvalidParameterError(f"{x.size} inputs for {w.shape[0]} rows")
    design = cfg.design(args.topology or dv.VSH).with_size(*w.shape)
    group = min(design.group_size, w.shape[0])
    if args.isolated_column:
        cal = imc.calibrate_adc(design, group, imc.ISOLATED, rows=w.shape[0])
    else:
        cal = imc.calibrate_adc(design, group, cfg.adc_mode, rows=w.shape[0], cols=w.shape[1])
    net = design.build(w)
    rng = np.random.default_rng(args.seed if args.seed is not None else cfg.seed)
    res = imc.xnor_mac(design, net, x, cal, group, noise=cfg.adc_noise, rng=rng)
    golden = [imc.golden_mac(x, w[:, c]) for c in range(w.shape[1])]
    summary = res.as_dict()
    summary.update(golden_out_m=golden, mismatches=int(sum(a != b for a, b in zip(summary["out_m"], golden))), adc=cal.mode)
    sio.write_rows(args.out / "mac_cycles.csv", res.rows())
    sio.write_json(args.out / "mac_summary.json", summary)
    if args.netlist:
        rows = tuple(range(group))
        bn = cb.apply_bias(net, design.scheme, cb.COMPUTE, inputs=x[:group], asserted_rows=rows)
        (args.out / "netlist.sp").write_text(cb.export_netlist(bn), encoding="utf-8")
    print(f"OUT_M = {summary['out_m']} over {res.n_cycles} cycle(s)")
    return EXIT_OK


def cmd_sweep_sm(args, cfg: ExperimentConfig) -> int:
    design = cfg.design(args.topology or dv.VSH)
    rep = an.sense_margin_sweep(design, cfg.sweep_column, isolated=args.isolated_column)
    mtj = design.cell.mtj
    an.write_long_csv(args.out / "sm_bands.csv", rep.rows(v_read=design.scheme.v_read, t_ox=mtj.t_ox * 1e9))
    sio.write_json(args.out / "sm_summary.json", dict(rep.as_dict(), topology=design.topology))
    print(f"{design.topology}: worst-case SM {rep.worst_case_sm * 1e6:.3f} uA, {rep.n + 1} bands, R^2 {rep.linearity_r2:.5f}")
    return EXIT_OK if rep.worst_case_sm >= args.min_sm_ua * 1e-6 else EXIT_DIAGNOSTIC


def cmd_cooptimize(args, cfg: ExperimentConfig) -> int:
    design = cfg.design(args.topology or dv.VSH)
    surf = an.cooptimize_sm(design, cfg.v_read_grid, cfg.t_ox_grid, cfg.sweep_column, isolated=args.isolated_column, jobs=args.jobs)
    rows = []
    for (v, t), rep in sorted(surf.reports.items()):
        rows += rep.rows(v_read=v, t_ox=round(t * 1e9, 6))
    an.write_long_csv(args.out / "sm_surface.csv", rows)
    best = surf.argmax
    sio.write_json(
        args.out / "sm_surface.json",
        {
            "topology": design.topology,
            "v_read_volts": list(surf.v_read),
            "t_ox_nm": [round(t * 1e9, 6) for t in surf.t_ox],
            "worst_case_sm_amps": surf.sm.tolist(),
            "argmax": {"v_read_volts": best[0], "t_ox_nm": round(best[1] * 1e9, 6)},
            "failed": {f"{v},{t}": e for (v, t), e in surf.failures.items()},
        },
    )
    print(f"best worst-case SM at V_READ={best[0]} V, T_OX={best[1] * 1e9:.2f} nm")
    return EXIT_DIAGNOSTIC if surf.failures else EXIT_OK


def cmd_rdm(args, cfg: ExperimentConfig) -> int:
    rows = []
    for topo in _topologies(args):
        rep = an.design_rdm(cfg.design(topo), cfg.sweep_column, isolated=args.isolated_column)
        for direction, (i, r) in sorted(rep.per_direction.items()):
            rows.append({"topology": topo, "direction": direction, "i_mtj_amps": i, "i_cr_amps": rep.i_cr[direction], "rdm_percent": r})
        print(f"{topo}: RDM {rep.rdm:.1f} % (I_MTJ {rep.i_mtj_max * 1e6:.2f} uA, {rep.worst_case})")
    sio.write_rows(args.out / "rdm.csv", rows)
    return EXIT_OK


def cmd_area(args, cfg: ExperimentConfig) -> int:
    rows = [{"topology": t, "area_um2": cost.cell_area(cfg.layout, t) * 1e12} for t in _topologies(args)]
    names = [r["topology"] for r in rows]
    if dv.VSH in names:
        for r in rows:
            if r["topology"] != dv.VSH:
                r["vsh_reduction_percent"] = cost.area_reduction(cfg.layout, dv.VSH, r["topology"])
    sio.write_rows(args.out / "area.csv", rows, fields=["topology", "area_um2", "vsh_reduction_percent"])
    print(cost.table_text([{k: r.get(k, "") for k in ("topology", "area_um2", "vsh_reduction_percent")} for r in rows]), end="")
    return EXIT_OK


def cmd_compare(args, cfg: ExperimentConfig) -> int:
    topos = _topologies(args)
    designs = {t: cfg.design(t) for t in topos}
    rows = cost.cost_table(designs, cfg.layout, cfg.cost)
    for r in rows:
        d = designs[r["topology"]]
        r["worst_case_sm_amps"] = an.sense_margin_sweep(d, cfg.sweep_column, isolated=args.isolated_column).worst_case_sm
        r["rdm_percent"] = an.design_rdm(d, cfg.sweep_column, isolated=args.isolated_column).rdm
    sio.write_rows(args.out / "compare.csv", rows)
    text = cost.table_text(rows)
    (args.out / "compare.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


COMMANDS = {
    "program": (cmd_program, "program a weight matrix with LLGS-verified writes"),
    "mac": (cmd_mac, "run an XNOR multiply-accumulate and decode every column"),
    "sweep-sm": (cmd_sweep_sm, "sense-margin IN/W sweeps on one column"),
    "cooptimize": (cmd_cooptimize, "worst-case SM over the V_READ x T_OX grid"),
    "rdm": (cmd_rdm, "read-disturb margin per topology"),
    "area": (cmd_area, "layout area per XNOR cell"),
    "compare": (cmd_compare, "area, energy, latency, SM and RDM side by side"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML file merged over the shipped defaults")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid sweeps")
    common.add_argument("--seed", type=int, default=None, help="override the configured seed")
    common.add_argument("--topology", choices=dv.TOPOLOGIES)
    common.add_argument("--isolated-column", action="store_true", help="solve the target column alone (no sneak paths)")
    common.add_argument("--netlist", action="store_true", help="also write a SPICE-style netlist")
    p = argparse.ArgumentParser(prog="spinxbar", description="Spin-based XNOR in-memory-computing crossbar simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_fn, help_) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_)
        if name in ("program", "mac"):
            sp.add_argument("weights", type=Path)
        if name == "mac":
            sp.add_argument("inputs", type=Path)
        if name == "sweep-sm":
            sp.add_argument("--min-sm-ua", type=float, default=1.0, help="diagnostic threshold (exit 1 below it)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SPINXBAR_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.jobs < 1:
            raise InvalidParameterError("--jobs must be at least 1")
        cfg = ExperimentConfig.load(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command][0](args, cfg)
    except SpinXbarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Compiled vs pure-Python LLGS kernel: wall time and agreement.

    python3 benchmarks/bench_kernels.py [--drive 1.5] [--horizon-ns 20] [--repeat 3]
"""
import argparse
import time

from spinxbar import kernels
from spinxbar.magnet import MagnetParams, SpinDrive, critical_current, llgs_integrate, tilted_state


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--drive", type=float, default=1.5, help="spin current in units of I_c0")
    ap.add_argument("--horizon-ns", type=float, default=20.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    mag = MagnetParams(30e-9, 30e-9, 1.3e-9, 1257.3, 2.3e6, 0.008)
    eff = 0.921
    i_s = args.drive * critical_current(mag, eff)
    m0 = tilted_state(mag, +1, 1.0)
    drive = SpinDrive(i_s, (0.0, 0.0, -1.0), eff)  # push +z toward -z
    horizon = args.horizon_ns * 1e-9

    def go(run):
        return llgs_integrate(mag, m0, drive, horizon, 1e-12, stop_on_switch=False, run=run)

    t_py, r_py = best_of(lambda: go(kernels.python_llgs_run), args.repeat)
    print(f"steps per run     {r_py.steps}")
    print(f"python            {t_py * 1e3:9.1f} ms")
    if kernels.BACKEND != "cython":
        print("compiled kernel not built; only the fallback was timed")
        return
    t_cy, r_cy = best_of(lambda: go(kernels.llgs_run), args.repeat)
    diff = max(abs(a - b) for a, b in zip(r_py.final_state.m, r_cy.final_state.m))
    print(f"cython            {t_cy * 1e3:9.1f} ms")
    print(f"speedup           {t_py / t_cy:9.1f} x")
    print(f"max |dm| final    {diff:.2e}")


if __name__ == "__main__":
    main()

"""Macrospin free-layer dynamics: energy barrier, critical current, LLGS.

Magnet parameters keep the CGS units used by device tables (emu/cm^3,
erg/cm^3, Oe); everything is converted to SI at the point of use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .constants import EMU_CM3_TO_A_M, ERG_CM3_TO_J_M3, HBAR, K_B, OE_PER_TESLA, Q_E
from .errors import InvalidParameterError, NumericalError

PERPENDICULAR = "perpendicular"
IN_PLANE = "in-plane"

_Z = np.array([0.0, 0.0, 1.0])
_X = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class MagnetParams:
    length: float  # m
    width: float  # m
    thickness: float  # m
    ms: float  # emu/cm^3
    k_u: float  # erg/cm^3, effective uniaxial anisotropy
    alpha: float
    gamma: float = 17.6  # 1e6 rad/(s*Oe)
    anisotropy_axis: str = PERPENDICULAR
    temperature: float = 300.0
    demag_field: float = 0.0  # Oe, in-plane magnets only

    def __post_init__(self):
        for name in ("length", "width", "thickness", "ms", "k_u", "gamma", "temperature"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError(f"damping must lie in (0, 1), got {self.alpha!r}")
        if self.anisotropy_axis not in (PERPENDICULAR, IN_PLANE):
            raise InvalidParameterError(f"unknown anisotropy axis {self.anisotropy_axis!r}")
        if self.demag_field < 0:
            raise InvalidParameterError("demag_field must be non-negative")

    @property
    def volume(self) -> float:
        return self.length * self.width * self.thickness

    @property
    def easy_axis(self) -> np.ndarray:
        return _Z.copy() if self.anisotropy_axis == PERPENDICULAR else _X.copy()

    @property
    def anisotropy_field(self) -> float:
        """H_k = 2 K / M_s in Oe."""
        return 2.0 * self.k_u / self.ms

    @property
    def gamma_si(self) -> float:
        """Gyromagnetic ratio in rad/(s*T)."""
        return self.gamma * 1e6 * OE_PER_TESLA


@dataclass
class MagnetState:
    m: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float).reshape(3).copy()

    @property
    def norm_error(self) -> float:
        return abs(float(np.linalg.norm(self.m)) - 1.0)

    def easy_sign(self, easy_axis=_Z) -> int:
        return 1 if float(np.dot(self.m, easy_axis)) >= 0 else -1


@dataclass(frozen=True)
class SpinDrive:
    spin_current: float  # A, magnitude of injected spin current
    polarization: tuple = (0.0, 0.0, 1.0)
    efficiency: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.polarization, dtype=float)
        if p.shape != (3,) or abs(np.linalg.norm(p) - 1.0) > 1e-9:
            raise InvalidParameterError("polarization must be a unit 3-vector")
        if not 0.0 < self.efficiency <= 1.0:
            raise InvalidParameterError(f"injection efficiency must lie in (0, 1], got {self.efficiency!r}")
        if self.spin_current < 0:
            raise InvalidParameterError("spin_current is a magnitude; flip the polarization instead")
        object.__setattr__(self, "polarization", tuple(float(v) for v in p))


@dataclass
class SwitchingResult:
    switched: bool
    switching_time: float | None
    final_state: MagnetState
    steps: int = 0
    max_norm_error: float = 0.0
    backend: str = field(default=kernels.BACKEND)

    def as_row(self) -> dict:
        return {
            "switched": self.switched,
            "switching_time_s": self.switching_time,
            "final_mx": float(self.final_state.m[0]),
            "final_my": float(self.final_state.m[1]),
            "final_mz": float(self.final_state.m[2]),
            "final_time_s": self.final_state.time,
        }


class EnergyBarrier(NamedTuple):
    joules: float
    kt: float


def energy_barrier(params: MagnetParams) -> EnergyBarrier:
    """K_U * V, also expressed in units of k_B T at the magnet temperature."""
    volume = params.volume
    if not volume > 0:
        raise InvalidParameterError("magnet volume must be positive")
    e_b = params.k_u * ERG_CM3_TO_J_M3 * volume
    return EnergyBarrier(e_b, e_b / (K_B * params.temperature))


def critical_current(params: MagnetParams, efficiency: float) -> float:
    """Zero-temperature spin-torque switching threshold (charge-equivalent amps).

    For in-plane magnets the threshold is raised by ``1 + H_d / (2 H_k)``.
    """
    if not 0.0 < efficiency <= 1.0:
        raise InvalidParameterError(f"injection efficiency must lie in (0, 1], got {efficiency!r}")
    e_b = energy_barrier(params).joules
    i_c = 4.0 * Q_E * params.alpha * e_b / (HBAR * efficiency)
    if params.anisotropy_axis == IN_PLANE:
        i_c *= 1.0 + params.demag_field / (2.0 * params.anisotropy_field)
    return i_c


def spin_torque_rate(params: MagnetParams, spin_current: float, efficiency: float) -> float:
    """Slonczewski torque amplitude in rad/s for a given spin current."""
    ms_si = params.ms * EMU_CM3_TO_A_M
    return params.gamma_si * HBAR * efficiency * spin_current / (2.0 * Q_E * ms_si * params.volume)


def tilted_state(params: MagnetParams, sign: int, tilt_deg: float = 1.0) -> MagnetState:
    """Unit vector ``tilt_deg`` away from the easy axis, on the ``sign`` side."""
    easy = params.easy_axis
    # tilt toward a direction orthogonal to both the easy axis and (for IMA) out of plane
    perp = _X if params.anisotropy_axis == PERPENDICULAR else np.array([0.0, 1.0, 0.0])
    th = math.radians(tilt_deg)
    return MagnetState(sign * math.cos(th) * easy + math.sin(th) * perp)


def switching_polarity(drive: SpinDrive, initial: MagnetState | None = None, easy_axis=_Z) -> int:
    """Easy-axis sign the free layer is pushed toward: ``sign(p . e)``."""
    proj = float(np.dot(drive.polarization, easy_axis))
    if abs(proj) < 1e-9:
        raise InvalidParameterError("polarization is orthogonal to the easy axis; drive is degenerate")
    return 1 if proj > 0 else -1


def llgs_integrate(
    params: MagnetParams,
    initial: MagnetState,
    drive: SpinDrive,
    horizon: float,
    step: float = 1e-12,
    threshold: float = 0.9,
    stop_on_switch: bool = True,
    run=None,
) -> SwitchingResult:
    """Fixed-step RK4 integration of the macrospin LLGS equation.

    Written in Landau-Lifshitz form,

        (1 + a^2) dm/dt = -m x h - a m x (m x h) - j m x (m x p) + a j m x p

    with ``h = gamma (H_k (m.e) e - H_d (m.n) n)`` and ``j`` the spin-torque
    rate.  ``m`` is renormalized after every step.  Switching is the first
    time the easy-axis component reaches ``-threshold`` relative to its
    initial sign.  ``run`` overrides the stepping kernel (benchmarks, tests).
    """
    if not step > 0:
        raise InvalidParameterError("step must be positive")
    if not horizon >= step:
        raise InvalidParameterError("horizon must be at least one step")
    if initial.norm_error > 1e-6:
        raise InvalidParameterError(f"initial magnetization is not a unit vector (|m|-1 = {initial.norm_error:.3g})")
    run = run or kernels.llgs_run
    easy = params.easy_axis
    normal = _Z.copy()
    w_k = params.gamma * 1e6 * params.anisotropy_field
    w_d = params.gamma * 1e6 * params.demag_field
    w_j = spin_torque_rate(params, drive.spin_current, drive.efficiency)
    m = np.ascontiguousarray(initial.m, dtype=float).copy()
    p = np.ascontiguousarray(drive.polarization, dtype=float)
    n_steps = int(round(horizon / step))
    t_sw, steps, max_err, nan_flag = run(m, easy, normal, w_k, w_d, params.alpha, w_j, p, step, n_steps, threshold, stop_on_switch)
    if nan_flag:
        raise NumericalError("NaN encountered during LLGS integration")
    final = MagnetState(m, initial.time + steps * step)
    switched = t_sw >= 0.0
    return SwitchingResult(
        switched=switched,
        switching_time=float(t_sw) if switched else None,
        final_state=final,
        steps=int(steps),
        max_norm_error=float(max_err),
        backend="python" if run is kernels.python_llgs_run else kernels.BACKEND,
    )

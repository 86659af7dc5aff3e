"""Pure-Python LLGS stepping kernel.

Mirror of ``_kernels.pyx``; used when the compiled extension is unavailable
or when ``SPINXBAR_PURE_PYTHON=1``.  Rates are in rad/s (already multiplied
by the gyromagnetic ratio).
"""
import math


def _rhs(mx, my, mz, ex, ey, ez, nx, ny, nz, wk, wd, alpha, wj, px, py, pz, pref):
    me = mx * ex + my * ey + mz * ez
    mn = mx * nx + my * ny + mz * nz
    hx = wk * me * ex - wd * mn * nx
    hy = wk * me * ey - wd * mn * ny
    hz = wk * me * ez - wd * mn * nz
    # m x h
    ax = my * hz - mz * hy
    ay = mz * hx - mx * hz
    az = mx * hy - my * hx
    # m x (m x h)
    bx = my * az - mz * ay
    by = mz * ax - mx * az
    bz = mx * ay - my * ax
    # m x p
    cx = my * pz - mz * py
    cy = mz * px - mx * pz
    cz = mx * py - my * px
    # m x (m x p)
    dx = my * cz - mz * cy
    dy = mz * cx - mx * cz
    dz = mx * cy - my * cx
    return (
        pref * (-ax - alpha * bx - wj * dx + alpha * wj * cx),
        pref * (-ay - alpha * by - wj * dy + alpha * wj * cy),
        pref * (-az - alpha * bz - wj * dz + alpha * wj * cz),
    )


def llgs_run(m, e, n, wk, wd, alpha, wj, p, dt, n_steps, threshold, stop_on_switch):
    """Advance ``m`` (3-element buffer, modified in place) by RK4 steps.

    Returns ``(t_switch, steps_taken, max_norm_error, nan_flag)``; ``t_switch``
    is negative when no switching event was detected.
    """
    mx, my, mz = float(m[0]), float(m[1]), float(m[2])
    ex, ey, ez = float(e[0]), float(e[1]), float(e[2])
    nx, ny, nz = float(n[0]), float(n[1]), float(n[2])
    px, py, pz = float(p[0]), float(p[1]), float(p[2])
    pref = 1.0 / (1.0 + alpha * alpha)
    args = (ex, ey, ez, nx, ny, nz, wk, wd, alpha, wj, px, py, pz, pref)
    s0 = 1.0 if mx * ex + my * ey + mz * ez >= 0.0 else -1.0
    prev = s0 * (mx * ex + my * ey + mz * ez)
    t_switch = -1.0
    max_err = 0.0
    h2 = 0.5 * dt
    k = 0
    while k < n_steps:
        k1 = _rhs(mx, my, mz, *args)
        k2 = _rhs(mx + h2 * k1[0], my + h2 * k1[1], mz + h2 * k1[2], *args)
        k3 = _rhs(mx + h2 * k2[0], my + h2 * k2[1], mz + h2 * k2[2], *args)
        k4 = _rhs(mx + dt * k3[0], my + dt * k3[1], mz + dt * k3[2], *args)
        mx += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        my += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        mz += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        norm = math.sqrt(mx * mx + my * my + mz * mz)
        if norm != norm:
            m[0], m[1], m[2] = mx, my, mz
            return t_switch, k + 1, max_err, 1
        mx /= norm
        my /= norm
        mz /= norm
        err = abs(math.sqrt(mx * mx + my * my + mz * mz) - 1.0)
        if err > max_err:
            max_err = err
        k += 1
        cur = s0 * (mx * ex + my * ey + mz * ez)
        if t_switch < 0.0 and cur <= -threshold:
            # linear interpolation of the crossing inside the last step
            frac = (prev + threshold) / (prev - cur) if prev != cur else 1.0
            t_switch = (k - 1 + frac) * dt
            if stop_on_switch:
                break
        prev = cur
    m[0], m[1], m[2] = mx, my, mz
    return t_switch, k, max_err, 0

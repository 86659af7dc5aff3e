# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LLGS stepping kernel; same contract as ``_kernels_py.llgs_run``."""
from libc.math cimport sqrt, fabs


cdef inline void _rhs(double mx, double my, double mz,
                      double ex, double ey, double ez,
                      double nx, double ny, double nz,
                      double wk, double wd, double alpha, double wj,
                      double px, double py, double pz, double pref,
                      double* out) nogil:
    cdef double me = mx * ex + my * ey + mz * ez
    cdef double mn = mx * nx + my * ny + mz * nz
    cdef double hx = wk * me * ex - wd * mn * nx
    cdef double hy = wk * me * ey - wd * mn * ny
    cdef double hz = wk * me * ez - wd * mn * nz
    cdef double ax = my * hz - mz * hy
    cdef double ay = mz * hx - mx * hz
    cdef double az = mx * hy - my * hx
    cdef double bx = my * az - mz * ay
    cdef double by = mz * ax - mx * az
    cdef double bz = mx * ay - my * ax
    cdef double cx = my * pz - mz * py
    cdef double cy = mz * px - mx * pz
    cdef double cz = mx * py - my * px
    cdef double dx = my * cz - mz * cy
    cdef double dy = mz * cx - mx * cz
    cdef double dz = mx * cy - my * cx
    out[0] = pref * (-ax - alpha * bx - wj * dx + alpha * wj * cx)
    out[1] = pref * (-ay - alpha * by - wj * dy + alpha * wj * cy)
    out[2] = pref * (-az - alpha * bz - wj * dz + alpha * wj * cz)


def llgs_run(double[::1] m, double[::1] e, double[::1] n,
             double wk, double wd, double alpha, double wj,
             double[::1] p, double dt, long n_steps,
             double threshold, bint stop_on_switch):
    cdef double mx = m[0], my = m[1], mz = m[2]
    cdef double ex = e[0], ey = e[1], ez = e[2]
    cdef double nx = n[0], ny = n[1], nz = n[2]
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double pref = 1.0 / (1.0 + alpha * alpha)
    cdef double s0 = 1.0 if mx * ex + my * ey + mz * ez >= 0.0 else -1.0
    cdef double prev = s0 * (mx * ex + my * ey + mz * ez)
    cdef double cur, frac, norm, err
    cdef double t_switch = -1.0
    cdef double max_err = 0.0
    cdef double h2 = 0.5 * dt
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef long k = 0
    cdef int nan_flag = 0
    with nogil:
        while k < n_steps:
            _rhs(mx, my, mz, ex, ey, ez, nx, ny, nz, wk, wd, alpha, wj, px, py, pz, pref, k1)
            _rhs(mx + h2 * k1[0], my + h2 * k1[1], mz + h2 * k1[2],
                 ex, ey, ez, nx, ny, nz, wk, wd, alpha, wj, px, py, pz, pref, k2)
            _rhs(mx + h2 * k2[0], my + h2 * k2[1], mz + h2 * k2[2],
                 ex, ey, ez, nx, ny, nz, wk, wd, alpha, wj, px, py, pz, pref, k3)
            _rhs(mx + dt * k3[0], my + dt * k3[1], mz + dt * k3[2],
                 ex, ey, ez, nx, ny, nz, wk, wd, alpha, wj, px, py, pz, pref, k4)
            mx += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            my += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            mz += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            norm = sqrt(mx * mx + my * my + mz * mz)
            if norm != norm:
                nan_flag = 1
                k += 1
                break
            mx /= norm
            my /= norm
            mz /= norm
            err = fabs(sqrt(mx * mx + my * my + mz * mz) - 1.0)
            if err > max_err:
                max_err = err
            k += 1
            cur = s0 * (mx * ex + my * ey + mz * ez)
            if t_switch < 0.0 and cur <= -threshold:
                if prev != cur:
                    frac = (prev + threshold) / (prev - cur)
                else:
                    frac = 1.0
                t_switch = (k - 1 + frac) * dt
                if stop_on_switch:
                    break
            prev = cur
    m[0] = mx
    m[1] = my
    m[2] = mz
    return t_switch, k, max_err, nan_flag

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: discrete p-energy on sphere paths and the tau ODE march.

Signatures and return values mirror ``_pykernels`` exactly.
"""

import numpy as np

from libc.math cimport fabs, pow, copysign, isfinite, exp, log, sqrt


cdef inline double _ipow(double a, int k) noexcept nogil:
    # exponentiation by squaring
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= a
        a *= a
        k >>= 1
    return r


cdef inline double _apow(double x, double e) noexcept nogil:
    # |x|**e for e > 0; libm pow is the bottleneck, so (half-)integer exponents are multiplied out
    cdef double a = fabs(x)
    if a == 0.0:
        return 0.0
    if e <= 32.0 and e == <double>(<int>e):
        return _ipow(a, <int>e)
    if e <= 32.0 and 2.0 * e == <double>(<int>(2.0 * e)):
        return _ipow(a, <int>e) * sqrt(a)
    return exp(e * log(a))


cdef inline double _spow(double x, double e) noexcept nogil:
    # sign(x) * |x|**e
    return copysign(_apow(x, e), x)


def p_energy(const double[:, ::1] g, const double[::1] w, double dt, double p):
    cdef Py_ssize_t T = g.shape[0], n = g.shape[1], t, i
    cdef double total = 0.0, d
    with nogil:
        for t in range(T - 1):
            for i in range(n):
                d = g[t + 1, i] - g[t, i]
                total += w[i] * _apow(d, p)
    return total * pow(dt, 1.0 - p) / p


def p_energy_grad(const double[:, ::1] g, const double[::1] w, double dt, double p):
    cdef Py_ssize_t T = g.shape[0], n = g.shape[1], t, i
    cdef double scale = pow(dt, 1.0 - p)
    out_arr = np.zeros((T, n))
    cdef double[:, ::1] out = out_arr
    # signed powers of consecutive differences, each computed once
    cdef double[::1] prev = np.empty(n), nxt = np.empty(n)
    with nogil:
        for i in range(n):
            prev[i] = _spow(g[1, i] - g[0, i], p - 1.0)
        for t in range(1, T - 1):
            for i in range(n):
                nxt[i] = _spow(g[t + 1, i] - g[t, i], p - 1.0)
                out[t, i] = w[i] * scale * (prev[i] - nxt[i])
            prev, nxt = nxt, prev
    return out_arr


def sphere_step(const double[:, ::1] g, const double[:, ::1] direction,
                double eta, const double[::1] w, double p):
    """Interior frames of ``g - eta * direction``, each rescaled to unit L^p norm."""
    cdef Py_ssize_t T = g.shape[0], n = g.shape[1], t, i
    out_arr = np.array(g, copy=True)
    cdef double[:, ::1] out = out_arr
    cdef double norm
    with nogil:
        for t in range(1, T - 1):
            norm = 0.0
            for i in range(n):
                out[t, i] = g[t, i] - eta * direction[t, i]
                norm += w[i] * _apow(out[t, i], p)
            norm = pow(norm, 1.0 / p)
            for i in range(n):
                out[t, i] /= norm
    return out_arr


def tangent_project(const double[:, ::1] g, const double[:, ::1] grad,
                    const double[::1] w, double p):
    """Remove from each frame of ``grad`` its component along ``w |g|^(p-2) g``."""
    cdef Py_ssize_t T = g.shape[0], n = g.shape[1], t, i
    out_arr = np.zeros((T, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] normal = np.empty(n)
    cdef double num, den
    with nogil:
        for t in range(1, T - 1):
            num = 0.0
            den = 0.0
            for i in range(n):
                normal[i] = w[i] * _spow(g[t, i], p - 1.0)
                num += normal[i] * grad[t, i]
                den += normal[i] * normal[i]
            if den > 0.0:
                num /= den
            for i in range(n):
                out[t, i] = grad[t, i] - num * normal[i]
    return out_arr


cdef inline int _tau_acc(const double[::1] f, const double[::1] xi, const double[::1] w,
                         double p, double tau, double taudot, double* acc) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0], i
    cdef double num = 0.0, den = 0.0, y
    for i in range(n):
        y = f[i] + tau * xi[i]
        num += w[i] * _spow(y, p - 1.0) * xi[i]
        den += w[i] * _apow(y, p)
    if not den >= 1e-14:
        return -1
    acc[0] = 2.0 * num / den * taudot * taudot
    return 0


def tau_rhs(const double[::1] f, const double[::1] xi, const double[::1] w,
            double p, double tau, double taudot):
    cdef double acc = 0.0
    if _tau_acc(f, xi, w, p, tau, taudot, &acc) != 0:
        raise ZeroDivisionError("degenerate L^p norm of f + tau*xi")
    return acc


cdef inline int _rk4(const double[::1] f, const double[::1] xi, const double[::1] w,
                     double p, double tau, double taudot, double h,
                     double* tau_out, double* taudot_out) noexcept nogil:
    cdef double k1, k2, k3, k4
    if _tau_acc(f, xi, w, p, tau, taudot, &k1) != 0:
        return -1
    if _tau_acc(f, xi, w, p, tau + 0.5 * h * taudot, taudot + 0.5 * h * k1, &k2) != 0:
        return -1
    if _tau_acc(f, xi, w, p, tau + 0.5 * h * taudot + 0.25 * h * h * k1,
                taudot + 0.5 * h * k2, &k3) != 0:
        return -1
    if _tau_acc(f, xi, w, p, tau + h * taudot + 0.5 * h * h * k2,
                taudot + h * k3, &k4) != 0:
        return -1
    tau_out[0] = tau + h * taudot + h * h / 6.0 * (k1 + k2 + k3)
    taudot_out[0] = taudot + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return 0


def tau_step(const double[::1] f, const double[::1] xi, const double[::1] w,
             double p, double tau, double taudot, double h):
    cdef double a = 0.0, b = 0.0
    if _rk4(f, xi, w, p, tau, taudot, h, &a, &b) != 0:
        raise ZeroDivisionError("degenerate L^p norm of f + tau*xi")
    return a, b


def tau_march(const double[::1] f, const double[::1] xi, const double[::1] w,
              double p, double tau0, double taudot0, double h, Py_ssize_t nsteps,
              bint stop_on_sign):
    """Fixed-step RK4 for tau'' = 2 N(tau) tau'^2.

    Returns ``(tau, taudot, last, status)``; arrays have ``nsteps + 1`` slots of
    which ``0..last`` are filled.  status: 0 finished, 1 f + tau*xi lost
    positivity after step ``last``, 2 non-finite state, 3 degenerate norm.
    """
    cdef Py_ssize_t n = f.shape[0], k, i, last = 0
    cdef int status = 0
    cdef double a, b, m
    tau_arr = np.full(nsteps + 1, np.nan)
    taudot_arr = np.full(nsteps + 1, np.nan)
    cdef double[::1] tau = tau_arr
    cdef double[::1] taudot = taudot_arr
    tau[0] = tau0
    taudot[0] = taudot0
    with nogil:
        for k in range(nsteps):
            if _rk4(f, xi, w, p, tau[k], taudot[k], h, &a, &b) != 0:
                status = 3
                break
            if not (isfinite(a) and isfinite(b)):
                status = 2
                break
            tau[k + 1] = a
            taudot[k + 1] = b
            last = k + 1
            if stop_on_sign:
                m = f[0] + a * xi[0]
                for i in range(1, n):
                    if f[i] + a * xi[i] < m:
                        m = f[i] + a * xi[i]
                if m <= 0.0:
                    status = 1
                    break
    return tau_arr, taudot_arr, last, status

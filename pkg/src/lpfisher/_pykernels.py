"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import math

import numpy as np


def _spow(x, e):
    return np.copysign(np.abs(x) ** e, x)


def p_energy(g, w, dt, p):
    d = np.diff(g, axis=0)
    return float(np.sum(np.abs(d) ** p @ w)) * dt ** (1.0 - p) / p


def p_energy_grad(g, w, dt, p):
    s = _spow(np.diff(g, axis=0), p - 1.0)
    out = np.zeros_like(g)
    out[1:-1] = w * dt ** (1.0 - p) * (s[:-1] - s[1:])
    return out


def sphere_step(g, direction, eta, w, p):
    """Interior frames of ``g - eta * direction``, each rescaled to unit L^p norm."""
    out = np.array(g, dtype=float, copy=True)
    inner = g[1:-1] - eta * direction[1:-1]
    norms = (np.abs(inner) ** p @ w) ** (1.0 / p)
    out[1:-1] = inner / norms[:, None]
    return out


def tangent_project(g, grad, w, p):
    """Remove from each frame of ``grad`` its component along ``w |g|^(p-2) g``."""
    out = np.zeros_like(grad)
    nv = w * _spow(g[1:-1], p - 1.0)
    den = np.sum(nv * nv, axis=1)
    coef = np.sum(nv * grad[1:-1], axis=1) / np.where(den > 0, den, 1.0)
    out[1:-1] = grad[1:-1] - coef[:, None] * nv
    return out


def tau_rhs(f, xi, w, p, tau, taudot):
    y = f + tau * xi
    den = float(np.dot(w, np.abs(y) ** p))
    if not den >= 1e-14:
        raise ZeroDivisionError("degenerate L^p norm of f + tau*xi")
    num = float(np.dot(w, _spow(y, p - 1.0) * xi))
    return 2.0 * num / den * taudot * taudot


def tau_step(f, xi, w, p, tau, taudot, h):
    k1 = tau_rhs(f, xi, w, p, tau, taudot)
    k2 = tau_rhs(f, xi, w, p, tau + 0.5 * h * taudot, taudot + 0.5 * h * k1)
    k3 = tau_rhs(f, xi, w, p, tau + 0.5 * h * taudot + 0.25 * h * h * k1, taudot + 0.5 * h * k2)
    k4 = tau_rhs(f, xi, w, p, tau + h * taudot + 0.5 * h * h * k2, taudot + h * k3)
    return (
        tau + h * taudot + h * h / 6.0 * (k1 + k2 + k3),
        taudot + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
    )


def tau_march(f, xi, w, p, tau0, taudot0, h, nsteps, stop_on_sign):
    tau = np.full(nsteps + 1, np.nan)
    taudot = np.full(nsteps + 1, np.nan)
    tau[0], taudot[0] = tau0, taudot0
    last, status = 0, 0
    for k in range(nsteps):
        try:
            a, b = tau_step(f, xi, w, p, tau[k], taudot[k], h)
        except ZeroDivisionError:
            status = 3
            break
        if not (math.isfinite(a) and math.isfinite(b)):
            status = 2
            break
        tau[k + 1], taudot[k + 1] = a, b
        last = k + 1
        if stop_on_sign and np.min(f + a * xi) <= 0.0:
            status = 1
            break
    return tau, taudot, last, status

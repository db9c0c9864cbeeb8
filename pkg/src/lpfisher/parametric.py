"""L^p-Fisher-Rao and alpha-connection geodesics on the univariate normal family.

Points are theta = (m, sigma) with sigma > 0.  Expectations over the standard
normal variable z = (x - m)/sigma use probabilists' Gauss-Hermite quadrature.
The score is (z/sigma, (z^2 - 1)/sigma), so a velocity v = (v1, v2) pushes
forward to nu/mu = r(z) = (v1 z + v2 (z^2 - 1))/sigma.

Integrands carrying |r|^(p-2) are not smooth at the real roots of r, where
Gauss-Hermite converges slowly.  Those use a root-adapted rule instead:
[-Z_MAX, Z_MAX] is cut at the roots and each piece gets a Gauss-Jacobi rule
whose endpoint weight |z - z0|^(p-2) absorbs the singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite_e, polynomial
from scipy.special import roots_jacobi

from .errors import SolverError

Z_MAX = 12.0  # standard normal tail beyond this is below 1e-32


@lru_cache(maxsize=64)
def _jacobi_rule(n, a, b):
    # nodes/weights on [-1, 1] for the weight (1 - x)^a (1 + x)^b
    x, w = roots_jacobi(n, a, b)
    return x, w


@dataclass(frozen=True)
class ThetaState:
    m: float
    sigma: float
    m_dot: float = 0.0
    sigma_dot: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def velocity(self):
        return np.array([self.m_dot, self.sigma_dot])


class NormalModel:
    """Quadrature rules for E[h(z)], z ~ N(0, 1).

    ``z``/``w`` is the Gauss-Hermite rule for smooth integrands.  ``rule``
    returns nodes adapted to the roots of a velocity's score polynomial, with
    ``n_nodes`` per piece.  ``adaptive=False`` uses Gauss-Hermite throughout.
    """

    def __init__(self, n_nodes=64, adaptive=True):
        z, w = hermite_e.hermegauss(n_nodes)
        self.n_nodes = n_nodes
        self.adaptive = adaptive
        self.z = z
        self.w = w / math.sqrt(2 * math.pi)

    def expect(self, values):
        return float(self.w @ values)

    def rule(self, v, p):
        """Nodes and weights for E[|r|^(p-2) h(z)] with r = v1 z + v2 (z^2 - 1), h smooth."""
        if not self.adaptive or p == 2:
            return self.z, self.w
        v1, v2 = float(v[0]), float(v[1])
        # v2 z^2 + v1 z - v2 has real roots with product -1; stable form
        q = -0.5 * (v1 + math.copysign(math.hypot(v1, 2 * v2), v1))
        small = -v2 / q if q != 0 else 0.0
        roots = [small] if small == 0 else [small, -1.0 / small]
        cuts = np.sort([z for z in roots if abs(z) < Z_MAX])
        ends = np.concatenate([[-Z_MAX], cuts, [Z_MAX]])
        e = p - 2
        zs, ws = [], []
        for k in range(ends.size - 1):
            lo, hi = ends[k], ends[k + 1]
            a = e if k + 1 < ends.size - 1 else 0.0  # singular at hi
            b = e if k > 0 else 0.0  # singular at lo
            x, wj = _jacobi_rule(self.n_nodes, a, b)
            half = 0.5 * (hi - lo)
            z = lo + half * (x + 1)
            # undo the Jacobi weight so that the rule integrates plain functions against phi
            corr = half ** (1 + a + b) / ((hi - z) ** a * (z - lo) ** b)
            zs.append(z)
            ws.append(wj * corr * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi))
        return np.concatenate(zs), np.concatenate(ws)


def _sigma(theta):
    s = theta[1] if not isinstance(theta, ThetaState) else theta.sigma
    if not s > 0:
        raise ValueError(f"sigma must be positive, got {s}")
    return float(s)


def _score(z, sigma):
    return np.stack([z / sigma, (z * z - 1) / sigma])


def fisher_matrix(model, theta):
    S = _score(model.z, _sigma(theta))
    return (S * model.w) @ S.T


def fp_theta(model, theta, v, p):
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    v = np.asarray(v, dtype=float)
    z, w = model.rule(v, p)
    r = v @ _score(z, _sigma(theta))
    return float(w @ np.abs(r) ** p) ** (1.0 / p)


def omega(theta, u, v, p):
    """Coefficients (ascending powers of z, length 5) of omega(u, v)/mu.

    omega_ij/mu = d_i d_j l + (1/p) d_i l d_j l, contracted with u and v.
    """
    sigma = _sigma(theta)
    u1, u2 = u
    v1, v2 = v
    mm = np.array([-1.0, 0.0, 1.0 / p])
    ms = np.array([0.0, -2.0 - 1.0 / p, 0.0, 1.0 / p])
    ss = np.array([1.0 + 1.0 / p, 0.0, -3.0 - 2.0 / p, 0.0, 1.0 / p])
    coef = polynomial.polyadd(mm * (u1 * v1), ms * (u1 * v2 + u2 * v1))
    coef = polynomial.polyadd(coef, ss * (u2 * v2))
    out = np.zeros(5)
    out[: coef.size] = coef
    return out / sigma**2


def _weights(model, theta, v, p):
    sigma = _sigma(theta)
    v = np.asarray(v, dtype=float)
    if not np.any(v != 0):
        raise ValueError("the Hessian metric is undefined at the zero velocity")
    z, w = model.rule(v, p)
    S = _score(z, sigma)
    r = v @ S
    with np.errstate(divide="ignore"):
        wt = np.where(r != 0, np.abs(r) ** (p - 2), 0.0) * w
    return z, S, r, wt


def g_matrix(model, theta, v, p):
    """(g^v)_ij = g^{phi_* v}(e_i, e_j) with e_i the score directions."""
    _, S, r, wt = _weights(model, theta, v, p)
    nn = wt @ (r * r)
    Ir = (S * wt) @ r
    Iss = (S * wt) @ S.T
    return (p - 1) * nn ** (2 / p - 1) * Iss - (p - 2) * nn ** (2 / p - 2) * np.outer(Ir, Ir)


def lp_geodesic_rhs(model, state, p):
    """Accelerations of the L^p-Fisher-Rao geodesic through ``state``."""
    theta = (state.m, state.sigma)
    v = state.velocity
    z, S, r, wt = _weights(model, theta, v, p)
    om = polynomial.polyval(z, omega(theta, v, v, p))
    nn = wt @ (r * r)
    Ir = (S * wt) @ r
    b = (p - 1) * nn ** (2 / p - 1) * ((S * wt) @ om) - (p - 2) * nn ** (2 / p - 2) * (wt @ (r * om)) * Ir
    G = (p - 1) * nn ** (2 / p - 1) * ((S * wt) @ S.T) - (p - 2) * nn ** (2 / p - 2) * np.outer(Ir, Ir)
    return -np.linalg.solve(G, b)


def alpha_normal_rhs(state, alpha):
    s = _sigma(state)
    md, sd = state.m_dot, state.sigma_dot
    return np.array(
        [
            2 * (1 + alpha) * md * sd / s,
            -(1 - alpha) * md * md / (2 * s) + (1 + 2 * alpha) * sd * sd / s,
        ]
    )


def _rk4(rhs, y0, T_steps):
    h = 1.0 / (T_steps - 1)
    ys = np.empty((T_steps, 4))
    ys[0] = y0

    def f(y):
        if not y[1] > 0:
            raise SolverError("sigma left the half-plane", sigma=y[1])
        return np.concatenate([y[2:], rhs(ThetaState(*y))])

    y = np.asarray(y0, dtype=float)
    for k in range(1, T_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[k] = y
    return ys


def shoot_bvp(rhs, theta0, theta1, T_steps=50, tol=1e-10, max_iter=50, fd_step=1e-7):
    """Shooting on the initial velocity with damped Newton and a finite-difference Jacobian.

    ``rhs`` maps a ThetaState to (m'', sigma'').  Returns an array of shape
    (T_steps, 4) with columns m, sigma, m', sigma' on uniform times in [0, 1].
    """
    th0, th1 = np.asarray(theta0, dtype=float), np.asarray(theta1, dtype=float)
    if not (th0[1] > 0 and th1[1] > 0):
        raise ValueError("endpoints need sigma > 0")
    if T_steps < 2:
        raise ValueError("need at least 2 time steps")
    if np.array_equal(th0, th1):
        return np.tile(np.concatenate([th0, [0.0, 0.0]]), (T_steps, 1))

    def miss(v):
        try:
            return _rk4(rhs, np.concatenate([th0, v]), T_steps)[-1, :2] - th1, True
        except (SolverError, np.linalg.LinAlgError, FloatingPointError):
            return None, False

    v = th1 - th0
    r, _ = miss(v)
    if r is None:
        raise SolverError("initial shot failed", velocity=v)
    best = (np.linalg.norm(r), v)
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol:
            return _rk4(rhs, np.concatenate([th0, v]), T_steps)
        J = np.empty((2, 2))
        for j in range(2):
            dv = np.zeros(2)
            dv[j] = fd_step * max(1.0, abs(v[j]))
            rp, okp = miss(v + dv)
            rm, okm = miss(v - dv)
            if not (okp and okm):
                raise SolverError("Jacobian evaluation failed", best_miss=best[0])
            J[:, j] = (rp - rm) / (2 * dv[j])
        step = np.linalg.solve(J, -r)
        lam = 1.0
        while lam > 1e-6:
            r_new, ok = miss(v + lam * step)
            if ok and np.linalg.norm(r_new) < np.linalg.norm(r):
                break
            lam *= 0.5
        else:
            raise SolverError("Newton stagnated", best_miss=best[0])
        v, r = v + lam * step, r_new
        if np.linalg.norm(r) < best[0]:
            best = (np.linalg.norm(r), v)
    raise SolverError("shooting did not converge", best_miss=best[0])

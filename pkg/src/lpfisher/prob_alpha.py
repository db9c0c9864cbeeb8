"""Alpha-connection geodesics on probability densities.

On the unit L^p sphere the geodesics are normalized chords
gamma(t) = (f + tau(t) xi) / ||f + tau(t) xi||, where the time change tau solves

    tau'' = 2 * (int |f + tau xi|^(p-2) (f + tau xi) xi) / (int |f + tau xi|^p) * tau'^2.

Pulling gamma back through the p-root transform gives the geodesic on Prob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .dens import DensGeodesicResult
from .errors import SolverError, TangencyError
from .grid import DensityField, GridSpec, PathGrid, TangentField, check_same_grid
from .proot import RootPoint, push_tangent

DEFAULT_DT = 1e-3


@dataclass(frozen=True)
class TauTrajectory:
    times: np.ndarray
    tau: np.ndarray
    tau_dot: np.ndarray
    p: float
    exit_time: float = math.inf
    initial_slope: float = 1.0

    def at(self, t):
        """Cubic Hermite interpolation of (tau, tau') at arbitrary times."""
        spline = CubicHermiteSpline(self.times, self.tau, self.tau_dot)
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0] - 1e-12) or np.any(t > self.times[-1] + 1e-12):
            raise ValueError("requested time outside the integrated interval")
        return spline(t), spline(t, 1)


def _resolve(f, grid):
    if isinstance(f, RootPoint):
        return np.asarray(f.values, dtype=float), f.grid
    f = np.ascontiguousarray(f, dtype=float)
    return f, grid or GridSpec.uniform(f.size)


def tau_rhs(f, xi, tau, tau_dot, p, grid=None):
    f, grid = _resolve(f, grid)
    xi = np.ascontiguousarray(xi, dtype=float)
    try:
        return kernels.tau_rhs(f, xi, grid.weights, float(p), float(tau), float(tau_dot))
    except ZeroDivisionError:
        raise ValueError("f + tau*xi has (numerically) zero L^p norm") from None


def p_tangency(f, xi, grid, p):
    """int xi |f|^(p-2) f lambda, zero for xi tangent to the sphere at f."""
    return float(grid.weights @ (xi * np.abs(f) ** (p - 2.0) * f))


def _crossing_time(f, xi, w, p, tau, taudot, h):
    # bisection on the sub-step length for the first sign change of min(f + tau xi)
    lo, hi = 0.0, h
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        a, _ = kernels.tau_step(f, xi, w, p, tau, taudot, mid)
        if np.min(f + a * xi) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def tau_ivp(f, xi, p, t_end, dt=DEFAULT_DT, grid=None, stop_on_exit=True):
    """Integrate the time change with tau(0)=0, tau'(0)=1 by fixed-step RK4.

    Integration stops once f + tau xi loses positivity; the crossing time is
    located by bisection between the bracketing steps and stored in
    ``exit_time``.  Returned samples all precede the crossing.
    """
    f, grid = _resolve(f, grid)
    xi = np.ascontiguousarray(xi, dtype=float)
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if abs(p_tangency(f, xi, grid, p)) > 1e-8:
        raise TangencyError("xi is not tangent to the L^p sphere at f")
    nsteps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / nsteps
    w = grid.weights
    times = h * np.arange(nsteps + 1)
    if not np.any(xi):
        return TauTrajectory(times, times.copy(), np.ones(nsteps + 1), float(p))
    tau, taudot, last, status = kernels.tau_march(f, xi, w, float(p), 0.0, 1.0, h, nsteps, stop_on_exit)
    if status in (2, 3):
        raise SolverError("tau integration broke down", time=last * h, status=status)
    exit_time = math.inf
    if status == 1:
        k = last - 1
        exit_time = k * h + _crossing_time(f, xi, w, float(p), tau[k], taudot[k], h)
        last = k
    sl = slice(0, last + 1)
    return TauTrajectory(times[sl].copy(), tau[sl].copy(), taudot[sl].copy(), float(p), exit_time)


def _shoot(f, xi, w, p, s, h, nsteps):
    tau, taudot, last, status = kernels.tau_march(f, xi, w, p, 0.0, s, h, nsteps, False)
    if status != 0:
        return math.inf, None
    return tau[-1] - 1.0, (tau, taudot)


def tau_bvp(f, g, p, T_steps, dt=DEFAULT_DT, grid=None, tol=1e-10, max_iter=100):
    """Time change for the chord from f to g with tau(0)=0, tau(1)=1.

    Shooting on tau'(0) with safeguarded secant steps from the guesses 0.5 and
    1.5.  The ODE is invariant under t -> c t, so tau(1; s) increases with the
    slope s and the root is unique.
    """
    f, grid = _resolve(f, grid)
    g = g.values if isinstance(g, RootPoint) else np.asarray(g, dtype=float)
    if T_steps < 2:
        raise ValueError("need at least 2 output times")
    xi = np.ascontiguousarray(g - f)
    w = grid.weights
    p = float(p)
    sub = max(1, math.ceil(1.0 / ((T_steps - 1) * dt) - 1e-9))
    nsteps = sub * (T_steps - 1)
    h = 1.0 / nsteps
    out_times = np.linspace(0.0, 1.0, T_steps)
    if np.max(np.abs(xi)) < 1e-15:
        return TauTrajectory(out_times, out_times.copy(), np.ones(T_steps), p)

    lo, hi = None, None  # slopes with miss < 0 and miss > 0
    s_prev, s = 0.5, 1.5
    m_prev, _ = _shoot(f, xi, w, p, s_prev, h, nsteps)
    last_ok = None
    for _ in range(max_iter):
        m, traj = _shoot(f, xi, w, p, s, h, nsteps)
        for s_i, m_i in ((s_prev, m_prev), (s, m)):
            if m_i < 0 and (lo is None or s_i > lo[0]):
                lo = (s_i, m_i)
            elif m_i > 0 and (hi is None or s_i < hi[0]):
                hi = (s_i, m_i)
        if traj is not None:
            last_ok = (s, m, traj)
        if traj is not None and abs(m) <= tol:
            tau, taudot = traj
            return TauTrajectory(out_times, tau[::sub].copy(), taudot[::sub].copy(), p, initial_slope=s)
        cand = None
        if math.isfinite(m) and math.isfinite(m_prev) and m != m_prev:
            cand = s - m * (s - s_prev) / (m - m_prev)
        if lo is not None and hi is not None:
            if cand is None or not lo[0] < cand < hi[0]:
                cand = 0.5 * (lo[0] + hi[0])
        elif cand is None or cand <= 0:
            cand = 2.0 * s if hi is None else 0.5 * s
        s_prev, m_prev, s = s, m, cand
    raise SolverError(
        "tau shooting did not converge",
        bracket=(lo, hi),
        last=None if last_ok is None else last_ok[:2],
    )


def blowup_estimate(a, p):
    """Upper bound p / (-min a/lambda) on the time an alpha-geodesic from lambda leaves Prob."""
    v = a.values if hasattr(a, "values") else np.asarray(a, dtype=float)
    if not np.any(v != 0):
        raise ValueError("blow-up estimate undefined for the zero velocity")
    m = float(np.min(v))
    return math.inf if m >= 0 else p / -m


def _frames(f, xi, tau, grid, p):
    y = f[None, :] + tau[:, None] * xi[None, :]
    norms = (np.abs(y) ** p @ grid.weights) ** (1.0 / p)
    gamma = y / norms[:, None]
    return np.abs(gamma) ** p, gamma


def alpha_geodesic_prob(mu0, target, p, mode="bvp", times=None, dt=DEFAULT_DT):
    """Alpha-connection geodesic (alpha = 1 - 2/p) on probability densities.

    ``mode="bvp"``: ``target`` is the end density.  ``mode="ivp"``: ``target``
    is a mean-zero initial velocity; frames stop before the time the
    geodesic leaves Prob, which is reported as ``blowup_time``.
    """
    if not mu0.probability:
        raise ValueError("start point must be a probability density")
    grid = mu0.grid
    t = np.linspace(0.0, 1.0, 30) if times is None else np.asarray(times, dtype=float)
    f = mu0.values ** (1.0 / p)
    if mode == "bvp":
        check_same_grid(mu0, target)
        if not target.probability:
            raise ValueError("end point must be a probability density")
        g = target.values ** (1.0 / p)
        traj = tau_bvp(f, g, p, max(2, t.size), dt=dt, grid=grid)
        tau, _ = traj.at(t)
        values, _ = _frames(f, g - f, tau, grid, p)
        values[t == 0.0] = mu0.values
        values[t == 1.0] = target.values
        return DensGeodesicResult(PathGrid(t, values, grid, probability=True), tau=traj)
    if mode == "ivp":
        check_same_grid(mu0, target)
        if not target.is_prob_tangent(1e-10):
            raise TangencyError("initial velocity must have zero total mass")
        xi = push_tangent(mu0, target, p)
        traj = tau_ivp(f, xi, p, float(np.max(t)), dt=dt, grid=grid)
        keep = (t < traj.exit_time) & (t <= traj.times[-1] + 1e-12)
        tk = t[keep]
        tau, _ = traj.at(tk)
        values, _ = _frames(f, xi, tau, grid, p)
        path = PathGrid(tk, values, grid, probability=True)
        left = math.isfinite(traj.exit_time)
        return DensGeodesicResult(path, traj.exit_time, left_space=left, tau=traj)
    raise ValueError(f"mode must be 'bvp' or 'ivp', got {mode!r}")


def prob_alpha_residual(path, p):
    """Sup defect of mu_tt - (1/p*) mu_t^2/mu + (1/p*) (int mu_t^2/mu) mu."""
    if len(path) < 3:
        raise ValueError("prob_alpha_residual needs at least 3 frames")
    dt = path.dt
    f = path.values
    if np.any(f <= 0):
        raise ValueError("residual needs positive frames")
    fm = f[1:-1]
    ft = (f[2:] - f[:-2]) / (2 * dt)
    ftt = (f[2:] - 2 * fm + f[:-2]) / dt**2
    q = (p - 1.0) / p
    energy = (ft * ft / fm) @ path.grid.weights
    defect = ftt - q * ft * ft / fm + q * energy[:, None] * fm
    return float(np.max(np.abs(defect)))

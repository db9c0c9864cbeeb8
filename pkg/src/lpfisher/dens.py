"""Closed-form geodesics, distance and residual checks on the positive densities.

Geodesics of both the L^p-Fisher-Rao metric and the alpha-connection with
alpha = 1 - 2/p are straight lines in root coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError
from .grid import PathGrid, TangentField, check_same_grid
from .proot import lp_norm, push_tangent


@dataclass(frozen=True)
class DensGeodesicResult:
    path: PathGrid
    blowup_time: float = float("inf")
    left_space: bool = False
    tau: object = None  # TauTrajectory for the Prob alpha-geodesics


def _times(times):
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    return t


def _positive(*mus):
    for mu in mus:
        if np.any(mu.values <= 0):
            raise PositivityError("geodesic endpoints must be positive densities")


def geodesic_bvp_dens(mu0, mu1, p, times):
    """Pull back the chord between the p-roots of mu0 and mu1."""
    grid = check_same_grid(mu0, mu1)
    _positive(mu0, mu1)
    t = _times(times)
    if np.any((t < 0) | (t > 1)):
        raise ValueError("times must lie in [0, 1]")
    g0, g1 = mu0.values ** (1.0 / p), mu1.values ** (1.0 / p)
    values = (t[:, None] * g1 + (1.0 - t[:, None]) * g0) ** p
    # endpoint frames reproduce the inputs bit for bit
    values[t == 0.0] = mu0.values
    values[t == 1.0] = mu1.values
    prob = mu0.probability and mu1.probability and np.all((t == 0) | (t == 1))
    return PathGrid(t, values, grid, probability=bool(prob))


def blowup_time_dens(mu0, a, p):
    """First time the root-space line g0 + t * Dphi(a) reaches zero: p * min f0/(-a)."""
    neg = a.values < 0
    if not np.any(neg):
        return float("inf")
    return float(p * np.min(mu0.values[neg] / -a.values[neg]))


def geodesic_ivp_dens(mu0, a, p, times):
    """Exponential map from mu0 with initial velocity a.

    Frames are returned for the requested times strictly before the blow-up
    time; ``left_space`` reports whether any requested time was dropped.
    """
    check_same_grid(mu0, a)
    _positive(mu0)
    t = _times(times)
    g0 = mu0.values ** (1.0 / p)
    xi = push_tangent(mu0, a, p)
    t_star = blowup_time_dens(mu0, a, p)
    keep = t < t_star
    tk = t[keep]
    values = (g0 + tk[:, None] * xi) ** p
    values[tk == 0.0] = mu0.values
    path = PathGrid(tk, values, mu0.grid)
    return DensGeodesicResult(path, t_star, left_space=bool(np.any(~keep)))


def distance_dens(mu0, mu1, p):
    """p * || mu1^(1/p) - mu0^(1/p) ||_{L^p(lambda)}."""
    grid = check_same_grid(mu0, mu1)
    _positive(mu0, mu1)
    return p * lp_norm(mu1.values ** (1.0 / p) - mu0.values ** (1.0 / p), grid, p)


def _time_derivatives(path, name):
    if len(path) < 3:
        raise ValueError(f"{name} needs at least 3 frames")
    dt = path.dt
    f = path.values
    ft = (f[2:] - f[:-2]) / (2 * dt)
    ftt = (f[2:] - 2 * f[1:-1] + f[:-2]) / dt**2
    return f[1:-1], ft, ftt


def dens_geodesic_residual(path, p):
    """Sup of |d/dt(mu_t/mu) + (1/p)(mu_t/mu)^2| over interior frames.

    Expanded as mu_tt/mu - (1 - 1/p)(mu_t/mu)^2 with central differences.
    """
    f, ft, ftt = _time_derivatives(path, "dens_geodesic_residual")
    if np.any(f <= 0):
        raise PositivityError("residual needs positive frames")
    u = ft / f
    return float(np.max(np.abs(ftt / f - (1.0 - 1.0 / p) * u * u)))


def alpha_connection_dens(mu, a, b, Dba, alpha):
    """Covariant derivative Db.a - (1/p*) (a/mu) b of the alpha-connection."""
    grid = check_same_grid(mu, a, b, Dba)
    if np.any(mu.values <= 0):
        raise PositivityError("alpha-connection needs a positive footpoint")
    inv_pstar = (1.0 + alpha) / 2.0
    return TangentField(grid, Dba.values - inv_pstar * a.values / mu.values * b.values)

"""L^p-Fisher-Rao geodesics on probability densities by discrete p-energy minimization.

The boundary value problem is posed on the unit L^p sphere in root
coordinates: minimize

    E(g) = (1/p) sum_t dt^(1-p) sum_i w_i |g[t+1, i] - g[t, i]|^p

over paths whose interior frames lie on the sphere, with the endpoint frames
fixed.  Descent uses the gradient projected onto each frame's tangent space,
a radial retraction back to the sphere, and backtracking on the step size
starting from a Barzilai-Borwein trial step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import PositivityError
from .grid import PathGrid, check_same_grid
from .proot import lp_norm


@dataclass(frozen=True, eq=False)
class SpherePath:
    times: np.ndarray
    points: np.ndarray
    p: float
    grid: object

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        if pts.shape != (self.times.size, self.grid.n):
            raise ValueError("points must have one row per time and one column per node")

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    def sphere_defect(self):
        return float(np.max(np.abs(np.abs(self.points) ** self.p @ self.grid.weights - 1.0)))

    def pullback(self):
        """Densities |g|^p; frames with nonpositive nodes are kept and flagged."""
        return PathGrid(self.times, np.abs(self.points) ** self.p, self.grid, probability=True)

    def nonpositive_frames(self):
        return np.flatnonzero(np.any(self.points <= 0, axis=1))


def discrete_p_energy(path):
    if path.points.shape[0] < 2:
        raise ValueError("energy needs at least 2 frames")
    return kernels.p_energy(path.points, path.grid.weights, path.dt, float(path.p))


def energy_gradient(path):
    """Gradient of the discrete p-energy in the node values; endpoint rows are zero."""
    if path.points.shape[0] < 3:
        raise ValueError("gradient needs at least 3 frames")
    return kernels.p_energy_grad(path.points, path.grid.weights, path.dt, float(path.p))


def chord_path(f, g, p, grid, T):
    """Normalized straight line (f + t (g - f)) / ||f + t (g - f)||_p on T uniform times."""
    t = np.linspace(0.0, 1.0, T)
    y = f[None, :] + t[:, None] * (g - f)[None, :]
    y /= ((np.abs(y) ** p @ grid.weights) ** (1.0 / p))[:, None]
    y[0], y[-1] = f, g
    return SpherePath(t, y, p, grid)


@dataclass
class LpGeodesicResult:
    path: PathGrid
    energy_trace: np.ndarray
    sphere: SpherePath
    iterations: int
    converged: bool
    message: str = ""
    flagged_frames: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def lp_geodesic_prob_bvp(mu0, mu1, p, T=30, max_iter=20000, tol=1e-8, eta0=0.1, min_eta=1e-14):
    """Minimize the discrete p-energy between two probability densities.

    Stops when the relative energy decrease of an accepted step drops below
    ``tol`` or after ``max_iter`` iterations.  If no step size above
    ``min_eta`` decreases the energy, the current path is returned with
    ``converged=False`` and an explanatory message.
    """
    grid = check_same_grid(mu0, mu1)
    if not (mu0.probability and mu1.probability):
        raise ValueError("endpoints must be probability densities")
    if np.any(mu0.values <= 0) or np.any(mu1.values <= 0):
        raise PositivityError("endpoints must be positive")
    if T < 3:
        raise ValueError("need at least 3 time points")
    p = float(p)
    f, g = mu0.values ** (1.0 / p), mu1.values ** (1.0 / p)
    sphere = chord_path(f, g, p, grid, T)
    w, dt = grid.weights, sphere.dt
    G = sphere.points
    energy = kernels.p_energy(G, w, dt, p)
    trace = [energy]
    if energy == 0.0:
        return _finish(sphere, trace, 0, True, "endpoints coincide")

    eta = eta0
    prev = None  # (path, direction) of the previous accepted iterate
    converged, message, it = False, "max_iter reached", 0
    for it in range(1, max_iter + 1):
        grad = kernels.p_energy_grad(G, w, dt, p)
        direction = kernels.tangent_project(G, grad, w, p)
        if prev is not None:
            s_vec, y_vec = G - prev[0], direction - prev[1]
            sy = float(np.vdot(s_vec, y_vec))
            # Barzilai-Borwein trial step, kept only when the curvature estimate is positive
            eta = float(np.vdot(s_vec, s_vec)) / sy if sy > 0 else 2.0 * eta
        eta = min(eta, 1e6)
        while True:
            cand = kernels.sphere_step(G, direction, eta, w, p)
            e_new = kernels.p_energy(cand, w, dt, p)
            if e_new < energy:
                break
            eta *= 0.5
            if eta < min_eta:
                break
        if eta < min_eta:
            it -= 1
            message = "energy did not decrease at the minimal step size"
            # a stationary path is a converged one
            converged = bool(np.max(np.abs(direction)) <= 1e-12 * max(1.0, np.max(np.abs(grad))))
            break
        rel = (energy - e_new) / energy
        prev = (G, direction)
        G, energy = cand, e_new
        trace.append(energy)
        if rel < tol:
            converged, message = True, "relative energy decrease below tol"
            break
    sphere = SpherePath(sphere.times, G, p, grid)
    return _finish(sphere, trace, it, converged, message)


def _finish(sphere, trace, it, converged, message):
    return LpGeodesicResult(
        path=sphere.pullback(),
        energy_trace=np.asarray(trace),
        sphere=sphere,
        iterations=it,
        converged=converged,
        message=message,
        flagged_frames=sphere.nonpositive_frames(),
    )


def speed_profile(path, p):
    """F_p(mu(t), mu_t(t)) at interior times, with central differences in t."""
    if len(path) < 3:
        raise ValueError("speed profile needs at least 3 frames")
    dt = path.dt
    f = path.values[1:-1]
    if np.any(f <= 0):
        raise PositivityError("speed profile needs positive frames")
    ft = (path.values[2:] - path.values[:-2]) / (2 * dt)
    return (np.abs(ft / f) ** p * f @ path.grid.weights) ** (1.0 / p)


def root_speed_profile(sphere):
    """p * ||g_t||_p per interior time; defined even where frames cross zero."""
    dt = sphere.dt
    gt = (sphere.points[2:] - sphere.points[:-2]) / (2 * dt)
    return np.array([sphere.p * lp_norm(row, sphere.grid, sphere.p) for row in gt])

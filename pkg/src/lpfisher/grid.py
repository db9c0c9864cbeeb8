"""Sample grids on [0, 1] and the basic quadrature functionals on densities.

A density mu is stored through its values ``f = mu / lambda`` at the grid
nodes, where lambda is the uniform probability measure realized by the
quadrature weights.  Every integral ``int h lambda`` becomes ``sum(w * h)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import GridMismatchError, PositivityError

DEFAULT_N = 100


def _frozen(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Nodes in [0, 1] and nonnegative quadrature weights summing to one."""

    nodes: np.ndarray
    weights: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        nodes, weights = _frozen(self.nodes), _frozen(self.weights)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size < 8:
            raise ValueError(f"grid needs at least 8 nodes, got {nodes.size}")
        if np.any(np.diff(nodes) <= 0) or nodes[0] < 0 or nodes[-1] > 1:
            raise ValueError("nodes must be strictly increasing in [0, 1]")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")

    @property
    def n(self):
        return self.nodes.size

    @classmethod
    def uniform(cls, n=DEFAULT_N, periodic=False):
        """Trapezoid grid on the interval, or equispaced midpoint grid on the circle."""
        if periodic:
            return cls(np.arange(n) / n, np.full(n, 1.0 / n), periodic=True)
        h = 1.0 / (n - 1)
        weights = np.full(n, h)
        weights[[0, -1]] = h / 2
        return cls(np.linspace(0.0, 1.0, n), weights, periodic=False)

    def compatible(self, other):
        return self is other or (
            self.periodic == other.periodic
            and self.n == other.n
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


def check_same_grid(*fields):
    grid = fields[0].grid
    for other in fields[1:]:
        if not grid.compatible(other.grid):
            raise GridMismatchError("fields live on different grids")
    return grid


@dataclass(frozen=True, eq=False)
class DensityField:
    """Node values of mu/lambda.

    ``boundary=True`` marks results allowed to touch or cross zero (points of
    the metric completion, or geodesics that left the space); otherwise all
    values must be positive.  ``sign_loss`` lists nodes known to be outside
    the space even though their stored value is positive, e.g. |g|^p of a
    negative root value.
    """

    grid: GridSpec
    values: np.ndarray
    probability: bool = False
    boundary: bool = False
    sign_loss: tuple = ()

    def __post_init__(self):
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        if not self.boundary and np.any(values <= 0):
            raise PositivityError(
                f"density has {np.count_nonzero(values <= 0)} nonpositive node(s)"
            )
        if self.probability and abs(self.mass - 1.0) > 1e-10:
            raise ValueError(f"probability density has mass {self.mass!r}")

    @property
    def mass(self):
        return float(self.grid.weights @ self.values)

    @property
    def nonpositive_nodes(self):
        bad = self.values <= 0
        bad[list(self.sign_loss)] = True
        return np.flatnonzero(bad)

    def normalized(self):
        return DensityField(self.grid, self.values / self.mass, probability=True)

    @classmethod
    def from_function(cls, grid, func, normalize=True):
        values = np.asarray(func(grid.nodes), dtype=float)
        field = cls(grid, values)
        return field.normalized() if normalize else field


@dataclass(frozen=True, eq=False)
class TangentField:
    """Node values of a/lambda for a tangent vector a."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {values.shape}")

    @property
    def mass(self):
        return float(self.grid.weights @ self.values)

    def is_prob_tangent(self, tol=1e-10):
        return abs(self.mass) <= tol

    def mean_free(self):
        """Subtract the mean so the field is tangent to the probability densities."""
        return TangentField(self.grid, self.values - self.mass)

    def __mul__(self, s):
        return TangentField(self.grid, s * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class PathGrid:
    """A time-indexed sequence of node-value frames sharing one grid."""

    times: np.ndarray
    values: np.ndarray
    grid: GridSpec
    probability: bool = False

    def __post_init__(self):
        times, values = _frozen(self.times), _frozen(self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if values.shape != (times.size, self.grid.n):
            raise ValueError(
                f"values shape {values.shape} does not match {times.size} frames "
                f"of {self.grid.n} nodes"
            )
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def frames(self):
        return [self.frame(k) for k in range(len(self))]

    def frame(self, k):
        v = self.values[k]
        return DensityField(self.grid, v, probability=self.probability, boundary=bool(np.any(v <= 0)))

    @property
    def dt(self):
        """Uniform time step; raises if the time grid is not uniform."""
        steps = np.diff(self.times)
        if steps.size == 0 or np.ptp(steps) > 1e-9 * steps.mean():
            raise ValueError("path times are not uniformly spaced")
        return float(steps.mean())

    @property
    def positive(self):
        return bool(np.all(self.values > 0))


def _vals(x):
    return x.values if hasattr(x, "values") else np.asarray(x, dtype=float)


def _require_positive(mu):
    v = _vals(mu)
    if np.any(v <= 0):
        raise PositivityError("density must be positive at every node")
    return v


def integrate(field, grid):
    """Quadrature of node values against lambda."""
    v = _vals(field)
    if v.shape != (grid.n,):
        raise ValueError(f"field has {v.size} values, grid has {grid.n} nodes")
    return float(grid.weights @ v)


def fp_norm(mu, a, p):
    """L^p-Fisher-Rao norm (int |a/mu|^p mu)^(1/p)."""
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    grid = check_same_grid(mu, a)
    f = _require_positive(mu)
    return float(grid.weights @ (np.abs(a.values / f) ** p * f)) ** (1.0 / p)


def fisher_rao_inner(mu, a, b):
    grid = check_same_grid(mu, a, b)
    f = _require_positive(mu)
    return float(grid.weights @ (a.values * b.values / f))


def alpha_divergence(mu, nu, alpha):
    """Amari alpha-divergence with p = 2/(1-alpha) and conjugate p* = 2/(1+alpha)."""
    if not -1 < alpha < 1:
        raise ValueError(f"alpha must lie in (-1, 1), got {alpha}")
    grid = check_same_grid(mu, nu)
    f, g = _require_positive(mu), _require_positive(nu)
    p, q = 2.0 / (1.0 - alpha), 2.0 / (1.0 + alpha)
    w = grid.weights
    cross = w @ (f ** (1.0 / p) * g ** (1.0 / q))
    return float(p * (w @ g) + q * (w @ f) - p * q * cross)


def _invert_monotone(phi, dphi, y, x_guess, iters=60):
    # Newton with bisection safeguard on [0, 1]; phi is increasing.
    lo, hi = np.zeros_like(y), np.ones_like(y)
    x = np.clip(x_guess, 0.0, 1.0)
    for _ in range(iters):
        r = phi(x) - y
        lo = np.where(r < 0, x, lo)
        hi = np.where(r > 0, x, hi)
        step = r / dphi(x)
        x_new = x - step
        bad = (x_new <= lo) | (x_new >= hi)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        if np.max(np.abs(x_new - x)) < 1e-15:
            x = x_new
            break
        x = x_new
    return x


def pushforward(phi, dphi, field):
    """Push a density or tangent field forward by an increasing bijection of [0, 1].

    ``phi`` and its derivative ``dphi`` are vectorized callables.  Node values
    of phi_* mu are f(phi^-1(y)) / phi'(phi^-1(y)), with f resampled by a
    cubic spline (periodic on the circle); if the spline would create a
    nonpositive density value, monotone cubic interpolation is used instead.
    """
    grid = field.grid
    x = grid.nodes
    probe = np.linspace(0.0, 1.0, 8 * grid.n + 1)
    if np.any(dphi(probe) <= 0) or np.any(np.diff(phi(probe)) <= 0):
        raise ValueError("pushforward requires a strictly increasing map")
    y_nodes = phi(x)
    guess = np.interp(x, y_nodes, x)
    xinv = _invert_monotone(phi, dphi, x, guess)
    v = field.values
    if grid.periodic:
        interp = CubicSpline(np.append(x, 1.0), np.append(v, v[0]), bc_type="periodic")
    else:
        interp = CubicSpline(x, v)
    resampled = interp(xinv)
    if isinstance(field, DensityField) and np.any(resampled <= 0) and np.all(v > 0):
        # spline overshoot near zero; the monotone interpolant keeps positivity
        resampled = PchipInterpolator(x, v)(xinv)
    new = resampled / dphi(xinv)
    if isinstance(field, DensityField):
        return DensityField(grid, new, boundary=field.boundary)
    return TangentField(grid, new)

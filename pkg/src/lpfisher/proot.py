"""The p-root transform mu -> (mu/lambda)^(1/p), its inverse, and its tangent map.

Root coordinates turn densities into positive L^p functions and probability
densities into positive points of the unit L^p sphere.  The tangent map is an
isometry up to the factor 1/p, so lengths measured in root coordinates are
multiplied by p to obtain L^p-Fisher-Rao lengths.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError
from .grid import DensityField, GridSpec, _frozen, check_same_grid


@dataclass(frozen=True, eq=False)
class RootPoint:
    grid: GridSpec
    values: np.ndarray
    p: float
    on_sphere: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.p <= 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.values.shape != (self.grid.n,):
            raise ValueError("root values do not match the grid")
        if self.on_sphere and abs(lp_norm(self.values, self.grid, self.p) ** self.p - 1) > 1e-10:
            raise ValueError("point flagged on_sphere has L^p norm != 1")


def lp_norm(values, grid, p):
    return float(grid.weights @ np.abs(values) ** p) ** (1.0 / p)


def forward(mu, p):
    if np.any(mu.values <= 0):
        raise PositivityError("p-root transform needs a positive density")
    return RootPoint(mu.grid, mu.values ** (1.0 / p), p, on_sphere=mu.probability)


def inverse(g):
    """|g|^p as a density; nodes where g <= 0 mark a point outside the open space."""
    values = np.abs(g.values) ** g.p
    bad = tuple(int(i) for i in np.flatnonzero(g.values <= 0))
    return DensityField(g.grid, values, probability=g.on_sphere, boundary=bool(bad), sign_loss=bad)


def push_tangent(mu, a, p):
    """Tangent map of the p-root transform: (1/p) (a/lambda) (mu/lambda)^(1/p - 1)."""
    check_same_grid(mu, a)
    f = mu.values
    if np.any(f <= 0):
        raise PositivityError("tangent map needs a positive density")
    return a.values * f ** (1.0 / p - 1.0) / p

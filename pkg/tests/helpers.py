"""Random smooth test fields shared by the test modules."""

import numpy as np

from lpfisher.grid import DensityField, GridSpec, TangentField


def smooth(grid, rng, modes=4, scale=1.0):
    x = grid.nodes
    out = np.zeros(grid.n)
    for k in range(1, modes + 1):
        out += rng.normal() / k * np.cos(2 * np.pi * k * x + rng.uniform(0, 2 * np.pi))
    return scale * out


def random_density(grid, rng, modes=4, probability=True):
    v = smooth(grid, rng, modes)
    v = np.exp(0.5 * v / max(1.0, np.max(np.abs(v))))
    mu = DensityField(grid, v)
    return mu.normalized() if probability else DensityField(grid, v * rng.uniform(0.5, 2.0))


def random_tangent(grid, rng, modes=4, mean_free=False):
    a = TangentField(grid, smooth(grid, rng, modes) + (0 if mean_free else rng.normal()))
    return a.mean_free() if mean_free else a


def uniform_grid(n=100):
    return GridSpec.uniform(n)

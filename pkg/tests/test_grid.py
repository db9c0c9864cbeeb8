import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_density, random_tangent
from lpfisher.errors import GridMismatchError, PositivityError
from lpfisher.grid import (
    DensityField,
    GridSpec,
    PathGrid,
    TangentField,
    alpha_divergence,
    fisher_rao_inner,
    fp_norm,
    integrate,
    pushforward,
)

seeds = st.integers(0, 2**32 - 1)
exponents = st.sampled_from([1.5, 2.0, 3.0, 5.0])


def wiggle(x):
    return x + 0.1 * np.sin(2 * np.pi * x)


def dwiggle(x):
    return 1 + 0.2 * np.pi * np.cos(2 * np.pi * x)


@pytest.mark.parametrize("n", [8, 33, 100])
@pytest.mark.parametrize("periodic", [False, True])
def test_weights_sum_to_one(n, periodic):
    g = GridSpec.uniform(n, periodic=periodic)
    assert abs(g.weights.sum() - 1) <= 1e-12
    assert np.all(np.diff(g.nodes) > 0)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        GridSpec.uniform(5)
    with pytest.raises(ValueError):
        GridSpec(np.linspace(0, 1, 10), np.full(10, 0.2))
    with pytest.raises(ValueError):
        GridSpec(np.linspace(0, 1, 10)[::-1], np.full(10, 0.1))


def test_integrate_examples():
    g = GridSpec.uniform(101)
    assert integrate(np.ones(g.n), g) == pytest.approx(1.0, abs=1e-14)
    assert integrate(2 * g.nodes, g) == pytest.approx(1.0, abs=1e-14)
    g200 = GridSpec.uniform(200)
    assert abs(integrate(2 * np.sin(2 * np.pi * g200.nodes) ** 2, g200) - 1) <= 1e-8
    with pytest.raises(ValueError):
        integrate(np.ones(5), g)


def test_integrate_linear(rng, grid):
    a, b = rng.normal(size=grid.n), rng.normal(size=grid.n)
    assert integrate(2 * a - 3 * b, grid) == pytest.approx(2 * integrate(a, grid) - 3 * integrate(b, grid), abs=1e-13)


def test_density_invariants(grid):
    with pytest.raises(PositivityError):
        DensityField(grid, np.r_[0.0, np.ones(grid.n - 1)])
    flagged = DensityField(grid, np.r_[0.0, np.ones(grid.n - 1)], boundary=True)
    assert flagged.nonpositive_nodes.tolist() == [0]
    with pytest.raises(ValueError):
        DensityField(grid, 2 * np.ones(grid.n), probability=True)
    mu = DensityField(grid, 2 * np.ones(grid.n)).normalized()
    assert mu.probability and abs(mu.mass - 1) <= 1e-12


def test_path_grid_invariants(grid):
    with pytest.raises(ValueError):
        PathGrid(np.array([0.0, 0.5, 0.4]), np.ones((3, grid.n)), grid)
    path = PathGrid(np.linspace(0, 1, 5), np.ones((5, grid.n)), grid)
    assert path.dt == pytest.approx(0.25)
    with pytest.raises(ValueError):
        PathGrid(np.array([0.0, 0.1, 1.0]), np.ones((3, grid.n)), grid).dt


def test_grid_mismatch(rng):
    g1, g2 = GridSpec.uniform(50), GridSpec.uniform(60)
    with pytest.raises(GridMismatchError):
        fp_norm(random_density(g1, rng), random_tangent(g2, rng), 2)


def test_fp_norm_examples():
    g = GridSpec.uniform(100)
    lam = DensityField(g, np.ones(g.n), probability=True)
    for p in (1.5, 2, 3, 7):
        assert fp_norm(lam, TangentField(g, np.full(g.n, -0.7)), p) == pytest.approx(0.7, rel=1e-14)
    g2 = GridSpec.uniform(2000)
    lam2 = DensityField(g2, np.ones(g2.n), probability=True)
    s = TangentField(g2, np.sin(2 * np.pi * g2.nodes))
    assert abs(fp_norm(lam2, s, 2) - math.sqrt(0.5)) <= 1e-6
    with pytest.raises(ValueError):
        fp_norm(lam, TangentField(g, np.ones(g.n)), 1.0)


@given(seed=seeds, p=exponents, s=st.floats(0.01, 100))
def test_fp_norm_homogeneous(seed, p, s):
    rng = np.random.default_rng(seed)
    g = GridSpec.uniform(64)
    mu, a = random_density(g, rng), random_tangent(g, rng)
    assert fp_norm(mu, s * a, p) == pytest.approx(s * fp_norm(mu, a, p), rel=1e-12)


@given(seed=seeds, p=exponents)
def test_fp_norm_triangle(seed, p):
    rng = np.random.default_rng(seed)
    g = GridSpec.uniform(64)
    mu, a, b = random_density(g, rng), random_tangent(g, rng), random_tangent(g, rng)
    ab = TangentField(g, a.values + b.values)
    assert fp_norm(mu, ab, p) <= fp_norm(mu, a, p) + fp_norm(mu, b, p) + 1e-12


def test_fisher_rao_inner_examples(rng, grid):
    mu, a, b, c = random_density(grid, rng), *(random_tangent(grid, rng) for _ in range(3))
    assert fisher_rao_inner(mu, a, a) == pytest.approx(fp_norm(mu, a, 2) ** 2, rel=1e-12)
    lin = TangentField(grid, 2 * a.values + 5 * c.values)
    assert fisher_rao_inner(mu, lin, b) == pytest.approx(
        2 * fisher_rao_inner(mu, a, b) + 5 * fisher_rao_inner(mu, c, b), rel=1e-12, abs=1e-13
    )
    g = GridSpec.uniform(200, periodic=True)
    lam = DensityField(g, np.ones(g.n), probability=True)
    s, co = TangentField(g, np.sin(2 * np.pi * g.nodes)), TangentField(g, np.cos(2 * np.pi * g.nodes))
    assert abs(fisher_rao_inner(lam, s, co)) <= 1e-8


@given(seed=seeds, alpha=st.floats(-0.95, 0.95))
def test_alpha_divergence_properties(seed, alpha):
    rng = np.random.default_rng(seed)
    g = GridSpec.uniform(64)
    mu, nu = random_density(g, rng, probability=False), random_density(g, rng, probability=False)
    assert alpha_divergence(mu, mu, alpha) == pytest.approx(0.0, abs=1e-12)
    d = alpha_divergence(mu, nu, alpha)
    assert d >= -1e-12
    assert d == pytest.approx(alpha_divergence(nu, mu, -alpha), abs=1e-12, rel=1e-12)


def test_alpha_divergence_direct_value(grid):
    # p = 4, p* = 4/3 for alpha = 1/2; constant densities 1 and 2
    mu = DensityField(grid, np.ones(grid.n))
    nu = DensityField(grid, 2 * np.ones(grid.n))
    expected = 4 * 2 + (4 / 3) * 1 - 4 * (4 / 3) * 2 ** 0.75
    assert alpha_divergence(mu, nu, 0.5) == pytest.approx(expected, rel=1e-13)
    with pytest.raises(ValueError):
        alpha_divergence(mu, nu, 1.0)


def test_alpha_divergence_zero_iff_equal(rng, grid):
    mu = random_density(grid, rng)
    for eps in (1e-1, 1e-3):
        bumped = DensityField(grid, mu.values * (1 + eps * np.sin(2 * np.pi * grid.nodes)))
        assert alpha_divergence(mu, bumped, 0.3) > 0


def test_pushforward_identity(rng, grid):
    mu = random_density(grid, rng)
    out = pushforward(lambda x: x, np.ones_like, mu)
    np.testing.assert_allclose(out.values, mu.values, rtol=1e-12)


@pytest.mark.parametrize("periodic", [False, True])
def test_pushforward_mass_and_invariance(periodic):
    rng = np.random.default_rng(7)
    g = GridSpec.uniform(400, periodic=periodic)
    mu = random_density(g, rng, modes=3)
    a = random_tangent(g, rng, modes=3)
    pm, pa = pushforward(wiggle, dwiggle, mu), pushforward(wiggle, dwiggle, a)
    assert abs(pm.mass - mu.mass) <= 1e-8
    for p in (1.5, 2, 3, 5):
        assert abs(fp_norm(pm, pa, p) - fp_norm(mu, a, p)) <= 1e-6


def test_pushforward_rejects_nonmonotone(rng, grid):
    mu = random_density(grid, rng)
    with pytest.raises(ValueError):
        pushforward(lambda x: x + 0.3 * np.sin(2 * np.pi * x), lambda x: 1 + 0.6 * np.pi * np.cos(2 * np.pi * x), mu)

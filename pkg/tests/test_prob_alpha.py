import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_density, random_tangent
from lpfisher.dens import geodesic_bvp_dens
from lpfisher.errors import TangencyError
from lpfisher.families import bump
from lpfisher.grid import DensityField, GridSpec, PathGrid, TangentField, pushforward
from lpfisher.prob_alpha import (
    alpha_geodesic_prob,
    blowup_estimate,
    prob_alpha_residual,
    tau_bvp,
    tau_ivp,
    tau_rhs,
)
from lpfisher.proot import forward

seeds = st.integers(0, 2**32 - 1)


def unit_mean_free(grid, rng):
    xi = random_tangent(grid, rng, mean_free=True).values
    return xi / math.sqrt(grid.weights @ xi**2)


def great_circle(f, g, w, t):
    theta = math.acos(np.clip(w @ (f * g), -1, 1))
    return (np.sin((1 - t)[:, None] * theta) * f + np.sin(t[:, None] * theta) * g) / math.sin(theta)


# tau ODE


def test_tau_rhs_examples(rng, grid):
    f = np.ones(grid.n)
    xi = unit_mean_free(grid, rng)
    assert tau_rhs(f, np.zeros(grid.n), 0.7, 1.3, 3.0, grid) == 0.0
    assert abs(tau_rhs(f, xi, 0.0, 1.0, 3.0, grid)) <= 1e-14
    for tau, taudot in ((0.3, 1.0), (1.2, 2.5)):
        expected = 2 * tau / (1 + tau**2) * taudot**2
        assert tau_rhs(f, xi, tau, taudot, 2.0, grid) == pytest.approx(expected, rel=1e-12)


def test_tau_rhs_degenerate(grid):
    with pytest.raises(ValueError):
        tau_rhs(np.zeros(grid.n), np.zeros(grid.n), 0.0, 1.0, 2.0, grid)


def test_tau_is_tan_at_p2(rng, grid):
    xi = unit_mean_free(grid, rng)
    traj = tau_ivp(np.ones(grid.n), xi, 2.0, 1.0, dt=1e-3, grid=grid, stop_on_exit=False)
    assert np.max(np.abs(traj.tau - np.tan(traj.times))) <= 1e-6
    t = np.linspace(0, 1, 37)
    tau, taudot = traj.at(t)
    assert np.max(np.abs(tau - np.tan(t))) <= 1e-6
    assert np.max(np.abs(taudot - 1 / np.cos(t) ** 2)) <= 1e-5


def test_tau_zero_direction(grid):
    traj = tau_ivp(np.ones(grid.n), np.zeros(grid.n), 3.0, 2.0, grid=grid)
    np.testing.assert_array_equal(traj.tau, traj.times)


def test_tau_ivp_input_checks(rng, grid):
    xi = random_tangent(grid, rng).values + 1.0
    with pytest.raises(TangencyError):
        tau_ivp(np.ones(grid.n), xi, 3.0, 1.0, grid=grid)
    with pytest.raises(ValueError):
        tau_ivp(np.ones(grid.n), unit_mean_free(grid, rng), 3.0, 1.0, dt=0.0, grid=grid)


@given(seed=seeds, p=st.sampled_from([1.5, 2.0, 3.0, 5.0]), scale=st.floats(0.1, 3.0))
def test_tau_dominates_t(seed, p, scale):
    rng = np.random.default_rng(seed)
    g = GridSpec.uniform(64)
    xi = scale * unit_mean_free(g, rng)
    traj = tau_ivp(np.ones(g.n), xi, p, 3.0, dt=2e-3, grid=g)
    assert np.all(traj.tau >= traj.times - 1e-12)
    assert np.all(np.diff(traj.tau) > 0)
    assert np.all(np.diff(traj.tau_dot) >= -1e-12)  # tau is convex from f = 1


def test_tau_exit_time(rng, grid):
    xi = 2 * unit_mean_free(grid, rng)
    traj = tau_ivp(np.ones(grid.n), xi, 3.0, 5.0, grid=grid)
    assert math.isfinite(traj.exit_time)
    assert traj.times[-1] <= traj.exit_time
    assert np.min(1 + traj.tau[-1] * xi) > 0
    # positivity is lost within one step of the recorded time
    tau_after, _ = tau_ivp(np.ones(grid.n), xi, 3.0, traj.exit_time + 1e-6, dt=1e-4, grid=grid, stop_on_exit=False).at(
        traj.exit_time + 1e-6
    )
    assert np.min(1 + tau_after * xi) <= 0


# boundary value problem


def test_tau_bvp_identity(grid):
    f = np.ones(grid.n)
    traj = tau_bvp(f, f, 3.0, 11, grid=grid)
    np.testing.assert_array_equal(traj.tau, np.linspace(0, 1, 11))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0])
def test_tau_bvp_hits_target(rng, grid, p):
    mu0, mu1 = random_density(grid, rng), random_density(grid, rng)
    f, g = forward(mu0, p).values, forward(mu1, p).values
    traj = tau_bvp(f, g, p, 30, grid=grid)
    assert abs(traj.tau[-1] - 1) <= 1e-10 and traj.tau[0] == 0
    assert np.all(np.diff(traj.tau) > 0)


def test_tau_bvp_p2_great_circle(grid):
    f = np.ones(grid.n)
    target = DensityField(grid, (1 + 0.3 * np.sin(2 * np.pi * grid.nodes)) ** 2).normalized()
    g = np.sqrt(target.values)
    traj = tau_bvp(f, g, 2.0, 41, grid=grid)
    y = f + traj.tau[:, None] * (g - f)
    gamma = y / np.sqrt(y**2 @ grid.weights)[:, None]
    assert np.max(np.abs(gamma - great_circle(f, g, grid.weights, traj.times))) <= 1e-5


# geodesics on Prob


def test_alpha_geodesic_p2_matches_great_circle(grid):
    mu0, mu1 = bump(grid, 0.3, 0.1), bump(grid, 0.7, 0.1)
    t = np.linspace(0, 1, 30)
    res = alpha_geodesic_prob(mu0, mu1, 2.0, times=t)
    circle = great_circle(np.sqrt(mu0.values), np.sqrt(mu1.values), grid.weights, t) ** 2
    assert np.max(np.abs(res.path.values - circle)) <= 1e-5


@pytest.mark.parametrize("p", [1.5, 3.0, 10.0])
def test_alpha_geodesic_unit_mass(rng, grid, p):
    mu0, mu1 = random_density(grid, rng), random_density(grid, rng)
    res = alpha_geodesic_prob(mu0, mu1, p, times=np.linspace(0, 1, 25))
    assert np.max(np.abs(res.path.values @ grid.weights - 1)) <= 1e-9
    assert np.array_equal(res.path.values[0], mu0.values)
    assert np.array_equal(res.path.values[-1], mu1.values)


@given(seed=seeds, p=st.sampled_from([1.5, 2.0, 4.0]))
def test_ivp_blowup_below_estimate(seed, p):
    rng = np.random.default_rng(seed)
    g = GridSpec.uniform(64)
    lam = DensityField(g, np.ones(g.n), probability=True)
    a = random_tangent(g, rng, mean_free=True)
    bound = blowup_estimate(a, p)
    res = alpha_geodesic_prob(lam, a, p, mode="ivp", times=np.linspace(0, 1.2 * bound, 50))
    assert res.left_space and res.blowup_time < bound
    assert np.max(np.abs(res.path.values @ g.weights - 1)) <= 1e-9
    assert np.all(res.path.values > 0)


def test_ivp_rejects_massive_velocity(rng, grid):
    lam = DensityField(grid, np.ones(grid.n), probability=True)
    with pytest.raises(TangencyError):
        alpha_geodesic_prob(lam, TangentField(grid, np.ones(grid.n)), 2.0, mode="ivp")
    with pytest.raises(ValueError):
        alpha_geodesic_prob(lam, lam, 2.0, mode="sideways")


def test_ivp_initial_velocity(rng, grid):
    mu = random_density(grid, rng)
    a = random_tangent(grid, rng, mean_free=True) * 0.3
    h = 1e-4
    res = alpha_geodesic_prob(mu, a, 3.0, mode="ivp", times=[0.0, h, 2 * h], dt=1e-5)
    v = (-3 * res.path.values[0] + 4 * res.path.values[1] - res.path.values[2]) / (2 * h)
    np.testing.assert_allclose(v, a.values, atol=1e-5)


def test_blowup_estimate_examples():
    grid = GridSpec.uniform(101)
    a = TangentField(grid, np.cos(2 * np.pi * grid.nodes) * 2)
    assert a.values.min() == pytest.approx(-2.0)
    assert blowup_estimate(a, 4.0) == pytest.approx(2.0)
    assert blowup_estimate(a * 2, 4.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        blowup_estimate(TangentField(grid, np.zeros(grid.n)), 2.0)


# residuals


@pytest.mark.parametrize("p", [1.5, 3.0, 5.0])
def test_prob_residual_second_order(rng, grid, p):
    mu0, mu1 = random_density(grid, rng), random_density(grid, rng)
    res = []
    for k in (16, 32, 64):
        path = alpha_geodesic_prob(mu0, mu1, p, times=np.linspace(0, 1, k + 1), dt=1e-4).path
        res.append(prob_alpha_residual(path, p))
    assert 3.3 < res[0] / res[1] < 4.7
    assert 3.3 < res[1] / res[2] < 4.7


def test_prob_residual_controls(rng, grid):
    mu0, mu1 = random_density(grid, rng), random_density(grid, rng)
    const = PathGrid(np.linspace(0, 1, 4), np.tile(mu0.values, (4, 1)), grid)
    assert prob_alpha_residual(const, 3.0) == 0.0
    t = np.linspace(0, 1, 33)
    dens_path = geodesic_bvp_dens(mu0, mu1, 3.0, t)
    prob_path = alpha_geodesic_prob(mu0, mu1, 3.0, times=t).path
    assert prob_alpha_residual(dens_path, 3.0) > 100 * prob_alpha_residual(prob_path, 3.0)


def test_equivariance_under_diffeo():
    g = GridSpec.uniform(400)
    rng = np.random.default_rng(11)
    mu0, mu1 = random_density(g, rng, modes=2), random_density(g, rng, modes=2)
    phi = lambda x: x + 0.1 * np.sin(2 * np.pi * x)
    dphi = lambda x: 1 + 0.2 * np.pi * np.cos(2 * np.pi * x)
    t = np.linspace(0, 1, 11)
    p = 3.0
    path = alpha_geodesic_prob(mu0, mu1, p, times=t).path
    pushed = alpha_geodesic_prob(
        pushforward(phi, dphi, mu0).normalized(), pushforward(phi, dphi, mu1).normalized(), p, times=t
    ).path
    for k in range(t.size):
        expected = pushforward(phi, dphi, DensityField(g, path.values[k])).values
        assert np.max(np.abs(pushed.values[k] - expected)) <= 1e-5

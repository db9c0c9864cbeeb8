"""Hessian metric, Cartan tensor and Chern-connection terms of the L^p-Fisher-Rao norm.

All quantities are taken at a footpoint mu along a reference direction nu,
through the integral functionals (u = nu/mu, a' = a/mu, ...)

    I(a, b)       = int |u|^(p-2) a' b' mu
    K(a, b, c)    = int |u|^(p-2) a' b' c' mu
    J4(a, b, c, d) = int |u|^(p-4) a' b' c' d' mu

Finite-difference oracles of F_p^2 are provided for checking the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError
from .grid import DensityField, TangentField, check_same_grid

NU_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class TensorContext:
    mu: DensityField
    nu: TangentField
    p: float

    def __post_init__(self):
        check_same_grid(self.mu, self.nu)
        if self.p <= 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if np.any(self.mu.values <= 0):
            raise PositivityError("footpoint must be a positive density")
        nu = np.abs(self.nu.values)
        if nu.max() == 0 or nu.min() < NU_FLOOR * nu.max():
            raise ValueError("reference direction nu vanishes at a grid node")

    @property
    def u(self):
        return self.nu.values / self.mu.values

    def _ratio(self, a):
        v = a.values if hasattr(a, "values") else np.asarray(a, dtype=float)
        return v / self.mu.values

    def _integral(self, weight, *args):
        prod = weight * self.mu.values
        for a in args:
            prod = prod * self._ratio(a)
        return float(self.mu.grid.weights @ prod)


def functional_I(ctx, a, b):
    return ctx._integral(np.abs(ctx.u) ** (ctx.p - 2), a, b)


def functional_K(ctx, a, b, c):
    return ctx._integral(np.abs(ctx.u) ** (ctx.p - 2), a, b, c)


def functional_J4(ctx, a, b, c, d):
    return ctx._integral(np.abs(ctx.u) ** (ctx.p - 4), a, b, c, d)


def hessian_g(ctx, a, b):
    """g^nu(a, b) = (1/2) d^2/ds dt F_p^2(mu, nu + s a + t b) at 0."""
    p, nu = ctx.p, ctx.nu
    N = functional_I(ctx, nu, nu)
    return (p - 1) * N ** (2 / p - 1) * functional_I(ctx, a, b) - (p - 2) * N ** (
        2 / p - 2
    ) * functional_I(ctx, nu, a) * functional_I(ctx, nu, b)


def cartan_C(ctx, a, b, c):
    """C^nu(a, b, c) = (1/4) third derivative of F_p^2 along a, b, c."""
    p, nu = ctx.p, ctx.nu
    N = functional_I(ctx, nu, nu)
    Ia, Ib, Ic = (functional_I(ctx, nu, x) for x in (a, b, c))
    bracket = (
        2 * Ia * Ib * Ic
        - N * (Ia * functional_I(ctx, b, c) + Ib * functional_I(ctx, a, c) + Ic * functional_I(ctx, a, b))
        + N**2 * functional_J4(ctx, nu, a, b, c)
    )
    return 0.5 * (p - 1) * (p - 2) * N ** (2 / p - 3) * bracket


def chern_prob_apply(ctx, a, Dnu_a):
    """Chern connection on Prob along a, given the flat derivative Dnu.a.

    Both nu and a are expected tangent to Prob; Dnu.a must integrate to zero
    for the result to integrate to zero.
    """
    grid = check_same_grid(ctx.mu, a, Dnu_a)
    p, f, w = ctx.p, ctx.mu.values, grid.weights
    u = ctx.u
    ap = a.values / f
    S = w @ (u * u * f)
    D = w @ (np.abs(u) ** (2 - p) * f)
    A = w @ (ap * u * f)
    B = w @ (np.abs(u) ** (-p) * ap * ctx.nu.values)
    c = (p - 1) * (p - 2) / (2 * p)
    k1 = -c * S / D
    k2 = (p - 1) / p * A / D + c * B * S / D**2
    values = (
        Dnu_a.values
        - (p - 1) / p * ap * u * f
        + k1 * np.abs(u) ** (-p) * ap * ctx.nu.values
        + k2 * np.abs(u) ** (2 - p) * f
    )
    return TangentField(grid, values)


def fp_squared(mu, v, p):
    """F_p(mu, v)^2 for a raw array of node values v."""
    f = mu.values
    return float(mu.grid.weights @ (np.abs(v / f) ** p * f)) ** (2.0 / p)


def hessian_fd(ctx, a, b, h=1e-4):
    """Mixed central difference of (1/2) F_p^2 at nu along a and b."""
    mu, nu, p = ctx.mu, ctx.nu.values, ctx.p
    a, b = ctx._ratio(a) * mu.values, ctx._ratio(b) * mu.values
    F = lambda s, t: fp_squared(mu, nu + s * a + t * b, p)
    return 0.5 * (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4 * h * h)


def _third_difference(mu, nu, a, b, c, p, h):
    total = 0.0
    for sa in (1, -1):
        for sb in (1, -1):
            for sc in (1, -1):
                total += sa * sb * sc * fp_squared(mu, nu + h * (sa * a + sb * b + sc * c), p)
    return 0.25 * total / (8 * h**3)


def cartan_fd(ctx, a, b, c, h=1e-3, extrapolate=True):
    """Third mixed central difference of F_p^2 at nu, times 1/4.

    With ``extrapolate`` the steps h and h/2 are combined (Richardson) to
    cancel the O(h^2) truncation term, which dominates where |nu/mu| is small.
    """
    mu, nu, p = ctx.mu, ctx.nu.values, ctx.p
    a, b, c = (ctx._ratio(x) * mu.values for x in (a, b, c))
    coarse = _third_difference(mu, nu, a, b, c, p, h)
    if not extrapolate:
        return coarse
    fine = _third_difference(mu, nu, a, b, c, p, h / 2)
    return (4 * fine - coarse) / 3

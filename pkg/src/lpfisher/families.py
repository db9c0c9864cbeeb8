"""Named density families, velocity fields, and the one-column CSV density format."""

from __future__ import annotations

import csv
import logging
import math
import re
from pathlib import Path

import numpy as np

from .grid import DensityField, GridSpec, TangentField

log = logging.getLogger(__name__)

_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def _gauss(x, m, s):
    return np.exp(-0.5 * ((x - m) / s) ** 2)


def uniform(grid):
    return DensityField(grid, np.ones(grid.n), probability=True)


def bump(grid, m, s):
    """Gaussian bump truncated to [0, 1] and normalized to unit mass."""
    if s <= 0:
        raise ValueError("bump width must be positive")
    return DensityField(grid, _gauss(grid.nodes, m, s)).normalized()


def mixture(grid, m1, s1, m2, s2, w):
    """w * bump(m1, s1) + (1 - w) * bump(m2, s2)."""
    if not 0 <= w <= 1:
        raise ValueError("mixture weight must lie in [0, 1]")
    v = w * bump(grid, m1, s1).values + (1 - w) * bump(grid, m2, s2).values
    return DensityField(grid, v).normalized()


FAMILIES = {"uniform": (uniform, 0), "bump": (bump, 2), "mixture": (mixture, 5)}


def _parse_call(text):
    m = _CALL.match(text)
    if not m:
        return None, None
    name, arglist = m.group(1), m.group(2)
    args = [float(a) for a in arglist.split(",")] if arglist and arglist.strip() else []
    return name, args


def read_column_csv(path, column):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != [column]:
        raise ValueError(f"{path}: expected a single column with header {column!r}")
    try:
        return np.array([float(r[0]) for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed value ({exc})") from None


def write_column_csv(path, column, values):
    with open(path, "w", newline="") as fh:
        fh.write(f"{column}\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")


def load_density(spec, grid=None, n=None, normalize=True, mass_tol=1e-6):
    """Resolve a family name like ``bump(0.3,0.1)`` or a CSV path to a density.

    CSV input defines the grid size (uniform trapezoid grid); a supplied
    ``grid`` must match it.  The result is normalized to unit mass, with a
    warning when that changed the mass by more than ``mass_tol``.
    """
    name, args = _parse_call(spec)
    if name in FAMILIES:
        func, nargs = FAMILIES[name]
        if len(args) != nargs:
            raise ValueError(f"{name} takes {nargs} argument(s), got {len(args)}")
        grid = grid or GridSpec.uniform(n or 100)
        return func(grid, *args)
    path = Path(spec)
    if not path.is_file():
        raise FileNotFoundError(f"no density family or file named {spec!r}")
    values = read_column_csv(path, "f")
    grid = grid or GridSpec.uniform(values.size)
    if values.size != grid.n:
        raise ValueError(f"{path}: {values.size} values for a grid of {grid.n} nodes")
    field = DensityField(grid, values)
    if not normalize:
        return field
    if abs(field.mass - 1.0) > mass_tol:
        log.warning("%s: renormalized from mass %.8g to 1", spec, field.mass)
    return field.normalized()


def load_velocity(spec, grid):
    """Resolve ``sin(k,amp)``, ``cos(k,amp)``, ``const(c)`` or a CSV (header ``a``)."""
    name, args = _parse_call(spec)
    x = grid.nodes
    if name in ("sin", "cos"):
        if len(args) > 2:
            raise ValueError(f"{name} takes at most 2 arguments")
        k, amp = (args + [1.0, 1.0][len(args):])[:2]
        trig = np.sin if name == "sin" else np.cos
        return TangentField(grid, amp * trig(2 * math.pi * k * x))
    if name == "const" and len(args) == 1:
        return TangentField(grid, np.full(grid.n, args[0]))
    path = Path(spec)
    if not path.is_file():
        raise FileNotFoundError(f"no velocity family or file named {spec!r}")
    values = read_column_csv(path, "a")
    if values.size != grid.n:
        raise ValueError(f"{path}: {values.size} values for a grid of {grid.n} nodes")
    return TangentField(grid, values)

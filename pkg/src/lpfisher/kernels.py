"""Backend selection for the inner loops.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported.  Setting ``LPFISHER_PURE_PYTHON=1`` forces the fallback.
"""

import importlib
import os

from . import _pykernels

_NAMES = (
    "p_energy",
    "p_energy_grad",
    "sphere_step",
    "tangent_project",
    "tau_rhs",
    "tau_step",
    "tau_march",
)


def _load_compiled():
    try:
        return importlib.import_module("lpfisher._ckernels")
    except ImportError:
        return None


_compiled = _load_compiled()

if _compiled is not None and not os.environ.get("LPFISHER_PURE_PYTHON"):
    _impl = _compiled
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels were not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


p_energy = _impl.p_energy
p_energy_grad = _impl.p_energy_grad
sphere_step = _impl.sphere_step
tangent_project = _impl.tangent_project
tau_rhs = _impl.tau_rhs
tau_step = _impl.tau_step
tau_march = _impl.tau_march

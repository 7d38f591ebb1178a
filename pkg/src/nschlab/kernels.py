"""Kernel backend selection.

The compiled extension is used when it imports; setting the environment
variable ``NSCHLAB_PURE_PYTHON=1`` forces the numpy fallback. All callers go
through this module and pass flat C-contiguous arrays.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("NSCHLAB_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "compiled"


def available_backends():
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("compiled")
    return names


def backend_module(name):
    """Return the kernel module for ``name`` ("python" or "compiled")."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


leray_inplace = _impl.leray_inplace
weighted_sq_sum = _impl.weighted_sq_sum
imex_update = _impl.imex_update
phi_source = _impl.phi_source
korteweg = _impl.korteweg
sym_outer = _impl.sym_outer
dot_pointwise = _impl.dot_pointwise
double_well_sum = _impl.double_well_sum

"""Solver kernel backends.

The hot loop (alternating projections with one small eigendecomposition per
grid block per iteration) exists twice: a compiled Cython core and a pure
numpy fallback. The compiled core is preferred when the extension built;
set INCOMPAT_KERNEL=python or =cython to force a choice.
"""

from __future__ import annotations

import os
from collections import namedtuple

from . import pycore

try:
    from . import _cycore  # compiled extension, optional
except ImportError:  # pragma: no cover - depends on build environment
    _cycore = None

# Outcome of a kernel run. grid/noise_row/noise_col hold the affine-side
# iterate at exit (margins satisfied to CG tolerance); stall_ratio is the
# residual improvement factor over the last stall window (nan if the run
# was shorter than one window or converged).
KernelResult = namedtuple(
    "KernelResult",
    ["converged", "grid", "noise_row", "noise_col", "residual", "iterations", "stall_ratio"],
)


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _cycore is not None else ("python",)


def active_backend() -> str:
    forced = os.environ.get("INCOMPAT_KERNEL", "").strip().lower()
    if forced in ("python", "pure", "py"):
        return "python"
    if forced in ("cython", "compiled", "cy"):
        if _cycore is None:
            raise RuntimeError("INCOMPAT_KERNEL requests the compiled kernel, but it is not built")
        return "cython"
    return "cython" if _cycore is not None else "python"


def get_solver(backend: str | None = None):
    """Return the solve() callable for a backend (default: the active one)."""
    name = backend or active_backend()
    if name == "python":
        return pycore.solve
    if name == "cython":
        if _cycore is None:
            raise RuntimeError("compiled kernel is not available")
        return _cycore.solve
    raise ValueError(f"unknown kernel backend {name!r}")

"""Kernel selection: compiled Cython core when importable, else pure Python.

Set ``NMEMS_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("NMEMS_PURE_PYTHON"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ("cython"/"python") or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")

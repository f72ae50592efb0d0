"""Kernel selection.

The compiled kernel is used when it imports; set ``DESKLAB_PURE_PYTHON=1``
to force the pure-Python fallback.  Both expose ``advance`` and
``next_event`` with identical semantics.
"""
import os

from . import _pykernels as python_kernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("DESKLAB_PURE_PYTHON") != "1":
    kernels = compiled_kernels
    NAME = "cython"
else:
    kernels = python_kernels
    NAME = "python"


def get(name: str | None = None):
    """Return the kernel module ``name`` ('cython' or 'python'), or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return python_kernels
    if name == "cython":
        if compiled_kernels is None:
            raise ImportError("compiled billiard kernel is not built")
        return compiled_kernels
    raise ValueError(f"unknown kernel backend {name!r}")

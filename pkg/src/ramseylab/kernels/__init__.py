"""Coloring kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it imports; set ``RAMSEYLAB_PURE=1`` to
force the fallback.  ``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels as python

compiled = None
if not os.environ.get("RAMSEYLAB_PURE"):
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

first_homogeneous = _impl.first_homogeneous
exhaustive = _impl.exhaustive
backtrack = _impl.backtrack


def get(name: str):
    """Kernel module by name: ``"python"`` or ``"cython"``."""
    if name == "python":
        return python
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built")
        return compiled
    raise ValueError(name)

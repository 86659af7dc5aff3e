"""Kernel selection: compiled extension when importable, else pure Python.

Set ``SPINXBAR_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
llgs_run = _kernels_py.llgs_run

if os.environ.get("SPINXBAR_PURE_PYTHON", "0") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        llgs_run = _compiled.llgs_run
        BACKEND = "cython"

python_llgs_run = _kernels_py.llgs_run

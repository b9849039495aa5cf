"""Kernel selection: compiled ``_ext`` when importable, numpy fallback otherwise.

Set ``STATDISCS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
poly_derivs = _kernels_py.poly_derivs
holder_quotient = _kernels_py.holder_quotient

if os.environ.get("STATDISCS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ext
    except ImportError:
        pass
    else:
        poly_derivs = _ext.poly_derivs
        holder_quotient = _ext.holder_quotient
        BACKEND = "compiled"

__all__ = ["BACKEND", "poly_derivs", "holder_quotient"]

"""Backend selection for the string kernels.

The compiled extension is preferred; the pure-Python module is used when the
extension was not built or ``LOGSPACE_PURE_PYTHON`` is set to a non-empty
value.
"""
import os

if os.environ.get("LOGSPACE_PURE_PYTHON"):
    from ._pykernels import lev, nlev, nlev_matrix

    BACKEND = "python"
else:
    try:
        from ._ckernels import lev, nlev, nlev_matrix

        BACKEND = "cython"
    except ImportError:  # extension not compiled
        from ._pykernels import lev, nlev, nlev_matrix

        BACKEND = "python"

__all__ = ["BACKEND", "lev", "nlev", "nlev_matrix"]

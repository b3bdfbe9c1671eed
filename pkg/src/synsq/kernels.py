"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Set ``SYNSQ_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("SYNSQ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import accumulate, emd_slices, select_max  # noqa: F401
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import accumulate, emd_slices, select_max  # noqa: F401

__all__ = ["BACKEND", "accumulate", "emd_slices", "select_max"]

"""Selects the box-covering kernel at import time.

Prefers the compiled extension; falls back to the NumPy implementation.
Set SPINFRACTAL_PURE_PYTHON=1 to force the fallback (used by the benchmark
and the kernel-equivalence tests).
"""

import os

_force_python = os.environ.get("SPINFRACTAL_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    from . import _covercore_py as kernel
else:
    try:
        from . import _covercore as kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _covercore_py as kernel

BACKEND = kernel.backend_name()
greedy_assign = kernel.greedy_assign

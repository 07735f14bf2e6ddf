"""Kernel backend selection: compiled extension if built, else pure Python.

Import `kernels` from here; `kernels.BACKEND` reports which one is live.
Set BARRIERLAB_FORCE_PYTHON=1 to force the fallback (used by the
benchmark to compare both sides in one process).
"""
from __future__ import annotations

import os

if os.environ.get("BARRIERLAB_FORCE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND

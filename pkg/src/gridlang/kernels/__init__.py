"""Kernel selection: compiled extension if built, numpy fallback otherwise.

Set GRIDLANG_FORCE_PY_KERNEL=1 to force the fallback (used by the
benchmark and for debugging).
"""
from __future__ import annotations

import os

if os.environ.get("GRIDLANG_FORCE_PY_KERNEL"):
    from ._vi_py import backward_induction
    KERNEL_BACKEND = "python"
else:
    try:
        from ._vi import backward_induction  # type: ignore[no-redef]
        KERNEL_BACKEND = "compiled"
    except ImportError:
        from ._vi_py import backward_induction  # type: ignore[no-redef]
        KERNEL_BACKEND = "python"

__all__ = ["backward_induction", "KERNEL_BACKEND"]

"""Kernel backend selection: compiled extension if available, else pure Python.

Set ``SSFKIT_BACKEND=python`` (or ``compiled``) to force a choice; the
benchmark harness uses this to compare the two implementations.
"""

import os

from . import _kernels_py

_forced = os.environ.get("SSFKIT_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _core as _compiled
        kernels = _compiled
        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "SSFKIT_BACKEND=compiled but the ssfkit._core extension is not built"
            )
        kernels = _kernels_py
        BACKEND = "python"


def backend_name() -> str:
    """Name of the active kernel backend ('compiled' or 'python')."""
    return BACKEND

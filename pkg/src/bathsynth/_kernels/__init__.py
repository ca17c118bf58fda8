"""Hot kernels with a compiled core and a NumPy fallback.

The compiled extension is used when it was built; setting
``BATHSYNTH_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

try:
    if os.environ.get("BATHSYNTH_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _core
except ImportError:
    _core = None

BACKENDS = {"python": _fallback}
if _core is not None:
    BACKENDS["cython"] = _core

BACKEND = "cython" if _core is not None else "python"
_active = BACKENDS[BACKEND]

lindblad_rk4 = _active.lindblad_rk4
permanents = _active.permanents


def get(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        return _active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}") from None

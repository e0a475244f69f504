"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module is used. Setting ``HRMAP_PURE_PYTHON=1``
forces the fallback.
"""
import os

from . import _pykernels

if os.environ.get("HRMAP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
dtw_accumulate = _impl.dtw_accumulate
dtw_backtrack = _impl.dtw_backtrack
sdtw_accumulate = _impl.sdtw_accumulate
sdtw_backtrack = _impl.sdtw_backtrack
gms_scan = _impl.gms_scan


def available_backends():
    """Map backend name to kernel module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

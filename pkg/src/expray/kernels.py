"""Backend selection for the hot loops.

The compiled extension is used when it imports; set EXPRAY_PURE=1 to force
the pure-Python fallback. ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("EXPRAY_PURE", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

expneg_segment = _impl.expneg_segment
taylor_polyline = _impl.taylor_polyline
chi_invert = _impl.chi_invert
filon_cells = _impl.filon_cells


def backends() -> dict:
    """Both implementations keyed by name (the compiled one only if built)."""
    out = {"python": _fallback}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out

"""Backend selection for the numerical hot spots.

The compiled Cython module is used when it was built; otherwise (or when the
``LORADEPLOY_PURE_PYTHON`` environment variable is set) the numpy versions in
``_kernels_py`` are used. ``BACKEND`` names the active implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LORADEPLOY_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

hyp2f1 = _impl.hyp2f1
hyp2f1_array = _impl.hyp2f1_array
segment_log1p_sum = _impl.segment_log1p_sum
timeline_collisions = _impl.timeline_collisions


def available_backends() -> dict:
    """Map backend name to module for every importable implementation."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out

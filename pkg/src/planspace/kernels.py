"""Kernel backend selection: compiled extension when available, numpy otherwise.

PLANSPACE_KERNELS=c forces the compiled backend (ImportError if missing),
PLANSPACE_KERNELS=python forces the fallback; anything else (or unset)
selects the extension when it imports. `BACKEND` records the choice.
"""

from __future__ import annotations

import os

from . import _pykernels

_forced = os.environ.get("PLANSPACE_KERNELS", "auto").strip().lower()
if _forced not in ("auto", "", "c", "python"):
    raise RuntimeError(
        f"PLANSPACE_KERNELS must be 'c', 'python' or unset, got {_forced!r}"
    )

if _forced == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "c"
    except ImportError:
        if _forced == "c":
            raise ImportError(
                "PLANSPACE_KERNELS=c but the compiled extension is not built; "
                "run 'pip install -e .' or 'python setup.py build_ext --inplace'"
            ) from None
        _impl = _pykernels
        BACKEND = "python"

pair_residuals = _impl.pair_residuals
normal_equations = _impl.normal_equations
iou_counts = _impl.iou_counts
pixel_diff = _impl.pixel_diff
iou_distance_stack = _impl.iou_distance_stack

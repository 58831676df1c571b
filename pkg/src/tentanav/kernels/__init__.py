"""Hot-path kernels: compiled core with a numpy fallback.

The compiled extension is preferred when built; set TENTANAV_KERNELS to
``numpy`` or ``compiled`` to force a backend (``compiled`` raises if the
extension is missing).
"""

from __future__ import annotations

import os

from tentanav.kernels import reference

_FORCED = os.environ.get("TENTANAV_KERNELS", "").strip().lower()
if _FORCED not in ("", "numpy", "compiled"):
    raise ImportError(f"TENTANAV_KERNELS must be 'numpy' or 'compiled', got {_FORCED!r}")

_compiled = None
if _FORCED != "numpy":
    try:
        from tentanav.kernels import _fastcore as _compiled
    except ImportError:
        _compiled = None
if _FORCED == "compiled" and _compiled is None:
    raise ImportError("TENTANAV_KERNELS=compiled but the compiled extension is not built")

_impl = _compiled if _compiled is not None else reference
BACKEND: str = "compiled" if _compiled is not None else "numpy"

accumulate_points = _impl.accumulate_points
classify_cells = _impl.classify_cells
update_occupancy = _impl.update_occupancy


def available_backends() -> tuple[str, ...]:
    return ("numpy", "compiled") if _compiled is not None else ("numpy",)


def backend_module(name: str):
    """Fetch a backend by name (for equivalence tests and benchmarks)."""
    if name == "numpy":
        return reference
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled backend is not available")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")

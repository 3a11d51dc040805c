"""Kernel backend selection.

The compiled extension is used when it imports; set ``FLOWLAB_PURE=1`` to
force the pure-Python implementation.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("FLOWLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

perimeter = _impl.perimeter
steiner = _impl.steiner
weighted = _impl.weighted
is_rhombus = _impl.is_rhombus
audit = _impl.audit
min_energy = _impl.min_energy

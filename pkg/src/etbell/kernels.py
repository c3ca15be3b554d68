"""Select the trial kernel implementation at import time.

The compiled extension is used when it has been built; otherwise the numpy
version is used.  Setting ``ETBELL_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("ETBELL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

tally_quantum = _impl.tally_quantum
tally_lhv = _impl.tally_lhv
IMPLEMENTATION: str = _impl.IMPLEMENTATION


def compiled_available() -> bool:
    import importlib.util

    return importlib.util.find_spec(f"{__package__}._kernels") is not None

"""Kernel backend selection.

The package ships a compiled extension (``aelab._core``) for the inner
loops and a pure-Python twin (``aelab._purekern``).  The compiled module
wins when importable; set ``AELAB_PURE_PYTHON=1`` to force the fallback
(useful for debugging and for benchmarking one against the other).
"""

import os

from . import _purekern

if os.environ.get("AELAB_PURE_PYTHON"):
    kernel = _purekern
else:
    try:
        from . import _core as kernel  # type: ignore[no-redef]
    except ImportError:
        kernel = _purekern

backend_name: str = kernel.backend_name

ENTRY_EMPTY: int = kernel.ENTRY_EMPTY
ENTRY_TERMINAL: int = kernel.ENTRY_TERMINAL

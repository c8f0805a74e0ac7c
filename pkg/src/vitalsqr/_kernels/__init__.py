"""Hot-loop kernels with a compiled core and a numpy fallback.

The Cython extension is preferred when importable; VITALS_QR_PURE=1 forces
the numpy implementation. Both expose the same functions with identical
contracts, and tree split decisions are bit-identical across the two.
"""

from __future__ import annotations

import os

from . import _purepy

if os.environ.get("VITALS_QR_PURE"):
    _impl = _purepy
else:
    try:
        from . import _ext as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _purepy

BACKEND = _impl.BACKEND
best_split = _impl.best_split
qr_descent = _impl.qr_descent
svr_descent = _impl.svr_descent


def available_backends():
    """Importable kernel modules keyed by name (for tests and benchmarks)."""
    out = {"purepy": _purepy}
    try:
        from . import _ext

        out["ext"] = _ext
    except ImportError:
        pass
    return out

"""Numeric hot-path kernels with an optional compiled fast path.

Two implementations of the same arithmetic live here: a Cython
extension (built at install time when a toolchain is available) and a
pure-Python twin.  Both perform identical floating-point operations in
identical order, so simulation output is bit-for-bit the same whichever
one is active; the extension is only faster.

Selection happens once at import.  ``WIREDRIVE_BACKEND`` overrides it:
``compiled`` requires the extension (ImportError when missing),
``python`` forces the fallback, ``auto``/unset prefers the extension.
"""

from __future__ import annotations

import os

from . import _fallback

_ENV_VAR = "WIREDRIVE_BACKEND"


def _select():
    requested = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if requested in ("python", "pure"):
        return _fallback, "python"
    if requested not in ("auto", "compiled", "c"):
        raise ValueError(
            f"{_ENV_VAR}={requested!r} not understood; "
            "use 'auto', 'compiled', or 'python'")
    try:
        from . import _speedups
    except ImportError:
        if requested in ("compiled", "c"):
            raise ImportError(
                f"{_ENV_VAR}={requested!r} but the compiled kernel is not "
                "built; reinstall with a C toolchain or set "
                f"{_ENV_VAR}=python") from None
        return _fallback, "python"
    return _speedups, "compiled"


_impl, backend_name = _select()

pd_batch = _impl.pd_batch

__all__ = ["backend_name", "pd_batch"]

"""Kernel backend selection.

The hot loops exist twice: a Cython extension (``tcsde._kernels``) and a
pure Python fallback with the same semantics.  The extension is preferred
when importable.  Set ``TCSDE_BACKEND=py`` to force the fallback, or
``TCSDE_BACKEND=c`` to insist on the extension (import fails if missing).
Within either backend results are bit-reproducible; across backends they
agree to rounding, not bit-for-bit.
"""

import os

import numpy as np

from . import _kernels_py
from .errors import ConfigError

_FORCE = os.environ.get("TCSDE_BACKEND", "").strip().lower()
if _FORCE not in ("", "c", "py"):
    raise ConfigError(
        f"TCSDE_BACKEND must be 'c' or 'py', got {_FORCE!r}", key="TCSDE_BACKEND")

_kernels_c = None
if _FORCE != "py":
    try:
        from . import _kernels as _kernels_c
    except ImportError:
        if _FORCE == "c":
            raise
        _kernels_c = None


def backend_name():
    """'c' when the compiled extension is active, else 'python'."""
    return "c" if _kernels_c is not None else "python"


def compiled_available():
    return _kernels_c is not None


def stable_transform(alpha, scale, u, w):
    """Positive-stable transform of (U, W) draw arrays."""
    if _kernels_c is not None:
        out = np.empty_like(u)
        _kernels_c.stable_transform(float(alpha), float(scale), u, w, out)
        return out
    return _kernels_py.stable_transform(alpha, scale, u, w)


def integrate_builtin(kind, params, x0, theta, delta, tau, db, tol, max_iter,
                      bracket_cap, with_companion):
    """Whole-path compiled integration for a builtin model kind.

    Returns (x, companion, iters) on success, the 1-based failing step index
    as ``int`` on solver failure, or None when no compiled path applies.
    """
    if _kernels_c is None or kind < 0:
        return None
    n = len(db)
    p = np.asarray(params if len(params) else (0.0,), dtype=np.float64)
    x_out = np.empty(n + 1)
    companion_out = np.empty(n + 1) if with_companion else np.empty(1)
    iters_out = np.zeros(n, dtype=np.int32)
    diag = np.zeros(2)
    fail_at = _kernels_c.integrate_theta(
        int(kind), p, float(x0), float(theta), float(delta),
        np.ascontiguousarray(tau, dtype=np.float64),
        np.ascontiguousarray(db, dtype=np.float64),
        float(tol), int(max_iter), int(bracket_cap),
        bool(with_companion), x_out, companion_out, iters_out, diag)
    if fail_at:
        return int(fail_at)
    return x_out, (companion_out if with_companion else None), iters_out

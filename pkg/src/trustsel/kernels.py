"""Kernel dispatch: compiled Cython core when built, numpy fallback otherwise.

Set ``TRUSTSEL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TRUSTSEL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2

pivot = _impl.pivot
simplex_loop = _impl.simplex_loop
dp_forward = _impl.dp_forward


def get_backend(name: str):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")

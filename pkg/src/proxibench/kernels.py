"""Kernel backend selection.

The compiled extension (built from ``_ckernels.pyx``) is preferred when it
imports cleanly; otherwise the pure-Python implementation in ``_pykernels``
is used. Setting the environment variable ``PROXIBENCH_PURE_KERNELS=1``
forces the pure backend, which is useful for benchmarking and for verifying
that both produce bit-identical results.
"""

from __future__ import annotations

import os

from . import _pykernels

FREE = _pykernels.FREE
OBSTACLE = _pykernels.OBSTACLE
OUT_OF_BOUNDS = _pykernels.OUT_OF_BOUNDS
SQRT2 = _pykernels.SQRT2
DIRS = _pykernels.DIRS
NO_DIR = _pykernels.NO_DIR

if os.environ.get("PROXIBENCH_PURE_KERNELS") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

astar_search = _impl.astar_search
convex_polygon_mask = _impl.convex_polygon_mask
BACKEND = _impl.BACKEND


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names

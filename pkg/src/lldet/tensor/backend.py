"""Kernel backend selection.

The compiled extension is preferred when it importable; the numpy
fallback is bit-identical, just slower.  Set ``LLDET_FORCE_NUMPY=1`` to
skip the extension (handy for benchmarking and debugging).
"""

import os

from . import kernels_numpy

if os.environ.get("LLDET_FORCE_NUMPY"):
    _impl = kernels_numpy
    HAVE_EXT = False
else:
    try:
        from . import _convkernels as _impl  # type: ignore[attr-defined]

        HAVE_EXT = True
    except ImportError:
        _impl = kernels_numpy
        HAVE_EXT = False

BACKEND = "ext" if HAVE_EXT else "numpy"

corr2d = _impl.corr2d
scatter2d = _impl.scatter2d
corr2d_k = _impl.corr2d_k

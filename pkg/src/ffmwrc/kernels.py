"""Kernel selection: the compiled extension if importable, else numpy.

Set ``FFMWRC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("FFMWRC_PURE_PYTHON"):
    from . import _kernels_py as _impl
    COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        from . import _kernels_py as _impl
        COMPILED = False

ml_binary = _impl.ml_binary
ml_general = _impl.ml_general
isd_binary = _impl.isd_binary

from . import _kernels_py as fallback  # noqa: E402

__all__ = ["COMPILED", "ml_binary", "ml_general", "isd_binary", "fallback"]

"""Pick the compiled kernel when available, numpy otherwise.

Set ``FBSCATTER_PURE=1`` to force the fallback.
"""

import logging
import os

logger = logging.getLogger(__name__)

_kernels = None
if os.environ.get("FBSCATTER_PURE") != "1":
    try:
        from . import _kernels
    except ImportError:
        _kernels = None

from . import _kernels_py

if _kernels is not None:
    bessel01 = _kernels.bessel01
    BACKEND = "cython"
else:
    bessel01 = _kernels_py.bessel01
    BACKEND = "numpy"
    logger.debug("compiled kernels unavailable, using numpy fallback")

__all__ = ["bessel01", "BACKEND"]

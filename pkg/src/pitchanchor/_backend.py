"""Select the integrator kernel at import time.

The compiled module is used when it was built; ``PITCHANCHOR_BACKEND=python``
forces the pure-Python fallback.
"""

import os
import warnings

from . import _kernels_py

_requested = os.environ.get("PITCHANCHOR_BACKEND", "auto").strip().lower()

if _requested == "python":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _requested == "cython":
            raise
        warnings.warn(
            "compiled kernel not available, using the pure-Python integrator",
            RuntimeWarning,
            stacklevel=2,
        )
        kernels = _kernels_py

BACKEND = kernels.BACKEND

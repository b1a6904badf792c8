"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The compiled extension is used when it imports; set ``NMQSL_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if not os.environ.get("NMQSL_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

rk4_propagate = _impl.rk4_propagate
track_spectrum = _impl.track_spectrum

__all__ = ["BACKEND", "rk4_propagate", "track_spectrum"]

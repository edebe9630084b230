"""Backend dispatch for the hot kernels.

The numba backend is the default; set PHOTONSTATS_NUMBA=0 to force the
pure-numpy path (same results, slower). The chosen backend name is
exposed as BACKEND for diagnostics and the benchmark script.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("PHOTONSTATS_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no")

if _WANT_NUMBA:
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:
        from . import _kernels_numpy as _impl
        BACKEND = "numpy"
else:
    from . import _kernels_numpy as _impl
    BACKEND = "numpy"

hankel_scaled = _impl.hankel_scaled
sphere_pair_sum = _impl.sphere_pair_sum
far_pair_sum = _impl.far_pair_sum
resolvent_rows = _impl.resolvent_rows

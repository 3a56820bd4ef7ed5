"""Select the compiled kernels when available, else the numpy fallback.

Set ``HECKEPAIR_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

FEJER = _pykernels.FEJER
RAISED_COSINE = _pykernels.RAISED_COSINE

_impl = _pykernels
BACKEND = "python"
if os.environ.get("HECKEPAIR_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

smooth_pair_sum = _impl.smooth_pair_sum
series_sums = _impl.series_sums
hurwitz12_table = _impl.hurwitz12_table
periodized = _pykernels.periodized
difference_table = _pykernels.difference_table

"""Batch update kernels, compiled when available.

At import time this package selects the compiled Cython kernels if the
extension was built, otherwise the pure-Python fallback. Both lanes are
numerically identical (same operations in the same order on float64), so
which lane runs affects throughput only. Set ``SWITCHMARL_PURE_PYTHON=1``
to force the fallback, e.g. for the lane-parity tests and benchmarks.
"""

import os

from . import fallback

if os.environ.get("SWITCHMARL_PURE_PYTHON"):
    _impl = fallback
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = fallback

BACKEND = _impl.BACKEND
td_update = _impl.td_update
switch_update = _impl.switch_update
mix_update = _impl.mix_update

"""Hot-kernel dispatch: numba-jitted by default, pure numpy as fallback.

Set GEOWARP_NO_NUMBA=1 to force the numpy path (or it is selected
automatically when numba is not importable).  Both implementations share
semantics; benchmarks/bench_kernels.py compares their speed.
"""

import os

_FORCE_NUMPY = os.environ.get("GEOWARP_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

if not _FORCE_NUMPY:
    try:
        import numba  # noqa: F401
        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA

if USE_NUMBA:
    from geowarp.kernels import numba_impl as impl
else:
    from geowarp.kernels import numpy_impl as impl

im2col = impl.im2col
col2im_add = impl.col2im_add
lstm_pointwise_forward = impl.lstm_pointwise_forward
lstm_pointwise_backward = impl.lstm_pointwise_backward
splat_points = impl.splat_points
raycast_scene = impl.raycast_scene
value_noise3 = impl.value_noise3

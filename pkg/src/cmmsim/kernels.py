"""Backend dispatch for the numeric kernels.

The compiled backend is the default. Set CMM_NUMBA=0 to force the pure-numpy
implementations, e.g. to rule out compilation as a source of a discrepancy or
to run where numba is not installed (the fallback is automatic in that case).
"""

import os

from . import _kernels_np

_want_numba = os.environ.get("CMM_NUMBA", "1") != "0"

if _want_numba:
    try:
        from . import _kernels_nb as _impl
        USING_NUMBA = True
    except ImportError:
        _impl = _kernels_np
        USING_NUMBA = False
else:
    _impl = _kernels_np
    USING_NUMBA = False

BACKEND = "numba" if USING_NUMBA else "numpy"

corridor_margins = _impl.corridor_margins
gnss_log_weights = _impl.gnss_log_weights
systematic_indices = _impl.systematic_indices
project_rows_to_weights = _impl.project_rows_to_weights
minimize_output_spread = _impl.minimize_output_spread

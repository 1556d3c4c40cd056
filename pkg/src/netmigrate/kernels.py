"""Hot inner loops, compiled when available.

The Cython module ``_kernels`` is used if it was built; otherwise (or when
``NETMIGRATE_PURE_PYTHON=1`` is set) the pure-Python twins are used.
``BACKEND`` records the choice.
"""

import os

from . import _kernels_py

if os.environ.get("NETMIGRATE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

subset_path_lengths = _impl.subset_path_lengths
ordered_path_lengths = _impl.ordered_path_lengths
superset_min = _impl.superset_min
greedy_sweep = _impl.greedy_sweep
transport_feasible = _impl.transport_feasible

__all__ = [
    "BACKEND",
    "subset_path_lengths",
    "ordered_path_lengths",
    "superset_min",
    "greedy_sweep",
    "transport_feasible",
]

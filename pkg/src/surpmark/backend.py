"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``SURPMARK_PURE_PYTHON=1`` (before import) forces the numpy
fallback. Both backends are bit-identical, so the choice only affects speed.
"""

import os

from . import _kernels_py

if os.environ.get("SURPMARK_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

kmeans_splits = _impl.kmeans_splits
count_pairs = _impl.count_pairs
walk_chain = _impl.walk_chain
simulate_transition_counts = _impl.simulate_transition_counts


def available_backends():
    """Map backend name -> kernel module, for parity tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels
        out["compiled"] = _ckernels
    except ImportError:
        pass
    return out

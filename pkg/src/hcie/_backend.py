"""Kernel backend chosen at import time.

The compiled extension is preferred.  ``HCIE_BACKEND=python`` forces the numpy
fallback; ``HCIE_BACKEND=compiled`` makes a missing extension an ImportError.
"""
import os

from . import _fallback

_choice = os.environ.get("HCIE_BACKEND", "auto").lower()

if _choice == "python":
    kernels = _fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _choice == "compiled":
            raise
        kernels = _fallback

NAME = kernels.NAME
COMPILED_MAX_PRECISION = getattr(kernels, "MAX_PRECISION", None)


def available():
    """All importable backends, compiled first."""
    found = []
    try:
        from . import _kernels
        found.append(_kernels)
    except ImportError:
        pass
    found.append(_fallback)
    return found


def logistic_bytes(x0, mu, precision, count):
    if COMPILED_MAX_PRECISION is not None and precision > COMPILED_MAX_PRECISION:
        return _fallback.logistic_bytes(x0, mu, precision, count)
    return kernels.logistic_bytes(x0, mu, precision, count)


def brute_force_scan(*args):
    precision = args[10]
    if COMPILED_MAX_PRECISION is not None and precision > COMPILED_MAX_PRECISION:
        return _fallback.brute_force_scan(*args)
    return kernels.brute_force_scan(*args)


sub_hcie_gather = kernels.sub_hcie_gather
densify = kernels.densify
bucket_order = kernels.bucket_order

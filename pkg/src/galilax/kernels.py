"""Backend selection for the integration hot loop.

The compiled module is used when it was built and ``GALILAX_PURE_PYTHON`` is
unset; otherwise the numpy reference implementation is used.
"""
import os

from galilax import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("GALILAX_PURE_PYTHON"):
    try:
        from galilax import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

reduced_wc_power = _impl.reduced_wc_power
z_rhs_power = _impl.z_rhs_power
k_rhs_power = _impl.k_rhs_power


def backends():
    """All importable backends, name -> module (used by tests and benchmarks)."""
    found = {"python": _pykernels}
    try:
        from galilax import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found

"""Kernel path selection.

The trajectory integrator exists twice: a numba-compiled per-trajectory loop
(`_kernels_numba`) and a vectorized pure-numpy fallback (`_kernels_numpy`).
Both consume the same counter-based noise stream, so a given
(master_seed, stream_id) produces the same increments on either path; results
agree to within libm rounding (tested at 1e-10 relative).

Selection order:
  * environment variable TRIPLETDC_DISABLE_NUMBA=1 forces pure numpy,
  * otherwise numba is used when importable, numpy when not.

`benchmarks/benchmark_kernels.py` times the two paths against each other.
"""

import os

_DISABLE = os.environ.get("TRIPLETDC_DISABLE_NUMBA", "").strip() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from tripletdc import _kernels_numba as _impl
        HAVE_NUMBA = True
    except ImportError:
        from tripletdc import _kernels_numpy as _impl
        HAVE_NUMBA = False
else:
    from tripletdc import _kernels_numpy as _impl
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"
heun_batch = _impl.heun_batch


def get_backend(name: str | None = None):
    """Return (backend_name, heun_batch) for an explicit path, or the default.

    name may be 'numba', 'numpy' or None. Asking for numba when it is not
    importable raises ImportError.
    """
    if name is None:
        return BACKEND, heun_batch
    if name == "numpy":
        from tripletdc import _kernels_numpy
        return "numpy", _kernels_numpy.heun_batch
    if name == "numba":
        from tripletdc import _kernels_numba
        return "numba", _kernels_numba.heun_batch
    raise ValueError(f"unknown backend {name!r}")

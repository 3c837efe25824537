"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; set
``KTFORGE_PURE_PYTHON=1`` to force the pure-Python twin.  Both backends
implement ``mono_mul``, ``mono_sort`` and ``bareiss`` with identical
semantics (see ``_kernels_py`` for the reference documentation).
"""

import os

if os.environ.get("KTFORGE_PURE_PYTHON"):
    from ktforge import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from ktforge import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from ktforge import _kernels_py as _impl

        BACKEND = "python"

mono_mul = _impl.mono_mul
mono_sort = _impl.mono_sort
bareiss = _impl.bareiss

"""Kernel dispatch: numba-compiled loops by default, pure numpy on request.

Set ``SCTB_PURE_NUMPY=1`` in the environment (before import) to force the
numpy fallback path.  ``benchmarks/bench_kernels.py`` times both.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

_FORCE_NUMPY = os.environ.get("SCTB_PURE_NUMPY", "").strip() not in ("", "0")

USING_NUMBA = False
if not _FORCE_NUMPY:
    try:
        from . import _kernels_numba

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a default dependency
        USING_NUMBA = False

_impl = _kernels_numba if USING_NUMBA else _kernels_numpy

exp_lin_raise_left = _impl.exp_lin_raise_left
exp_lin_lower_right = _impl.exp_lin_lower_right
lin_raise_left = _impl.lin_raise_left
lin_lower_right = _impl.lin_lower_right
exp_quad_raise_matrix = _impl.exp_quad_raise_matrix
preserve_matrix = _impl.preserve_matrix

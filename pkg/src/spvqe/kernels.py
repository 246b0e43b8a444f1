"""Kernel backend selection.

The compiled extension is used when importable; ``SPVQE_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

if os.environ.get("SPVQE_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import observable_values, prepare_state, shift_gradients, term_values

    BACKEND = "python"
else:
    try:
        from ._kernels import observable_values, prepare_state, shift_gradients, term_values

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import observable_values, prepare_state, shift_gradients, term_values

        BACKEND = "python"

from . import _kernels_py as python_backend

__all__ = [
    "BACKEND",
    "observable_values",
    "prepare_state",
    "python_backend",
    "shift_gradients",
    "term_values",
]

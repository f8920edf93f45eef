"""Selects the compiled kernel if it is importable, the numpy one otherwise.

Set ``FRIEDRICHS_BACKEND=python`` to force the fallback.
"""
import logging
import os

LOGGER = logging.getLogger(__name__)

if os.environ.get("FRIEDRICHS_BACKEND", "").lower() == "python":
    from friedrichs._kernels_py import cauchy_pairs
    BACKEND = "python"
else:
    try:
        from friedrichs._kernels_c import cauchy_pairs
        BACKEND = "cython"
    except ImportError:  # extension not built
        from friedrichs._kernels_py import cauchy_pairs
        BACKEND = "python"
        LOGGER.debug("compiled kernel unavailable, using numpy fallback")

__all__ = ["cauchy_pairs", "BACKEND"]

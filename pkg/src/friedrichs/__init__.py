"""Friedrichs model at finite multiplicity: Livšic matrix, resonances, scattering and Hardy-space tools."""
import os as _os

# FRIEDRICHS_THREADS caps BLAS/OpenMP workers; it only takes effect when this
# package is imported before numpy initializes its thread pools.
_threads = _os.environ.get("FRIEDRICHS_THREADS", "")
if _threads.strip() not in ("", "0"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads.strip())

from friedrichs._backend import BACKEND  # noqa: E402
from friedrichs.errors import (FriedrichsError, IdentityViolation, NumericalError,  # noqa: E402
                               ParseError, ValidationFailure)
from friedrichs.model import (ModelSpec, RationalMatrixFunction, RationalTerm,  # noqa: E402
                              make_model, scalar_example, two_by_two_example, validate_model)
from friedrichs.stieltjes import SheetTag, phi  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "FriedrichsError", "IdentityViolation", "ModelSpec", "NumericalError",
    "ParseError", "RationalMatrixFunction", "RationalTerm", "SheetTag", "ValidationFailure",
    "make_model", "phi", "scalar_example", "two_by_two_example", "validate_model",
]

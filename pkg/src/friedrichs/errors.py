"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
library failures onto process exit codes without a lookup table.
"""


class FriedrichsError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def record(self):
        """Structured representation used by the CLI error printer."""
        return {"error": type(self).__name__, "message": str(self)}


class ParseError(FriedrichsError):
    exit_code = 2

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line

    def record(self):
        rec = super().record()
        rec["field"] = self.field
        rec["line"] = self.line
        return rec


class ValidationFailure(FriedrichsError):
    exit_code = 3

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(FriedrichsError):
    """Numerical breakdown: singular matrices, non-convergence, lost roots."""

    exit_code = 4


class PoleHit(NumericalError):
    pass


class DegenerateConfluence(NumericalError):
    pass


class NonConvergent(NumericalError):
    """Integral does not converge (kernel orders too low)."""


class NearSingular(NumericalError):
    def __init__(self, message, sigma_min=None):
        super().__init__(message)
        self.sigma_min = sigma_min

    def record(self):
        rec = super().record()
        rec["sigma_min"] = self.sigma_min
        return rec


class NoConvergence(NumericalError):
    pass


class BoundaryZero(NumericalError):
    pass


class MaxDepthExceeded(NumericalError):
    def __init__(self, message, unresolved=()):
        super().__init__(message)
        self.unresolved = list(unresolved)

    def record(self):
        rec = super().record()
        rec["unresolved"] = [list(r) for r in self.unresolved]
        return rec


class ContinuationLost(NumericalError):
    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class NoPole(NumericalError):
    pass


class TailTooFat(NumericalError):
    pass


class ExtensionIllposed(NumericalError):
    pass


class IdentityViolation(FriedrichsError):
    """A theorem-level identity failed numerically; points at an upstream bug."""

    exit_code = 5


class HigherOrderPole(IdentityViolation):
    pass


class OnBranchCut(NumericalError):
    """Evaluation point lies on a branch cut and no side was specified."""

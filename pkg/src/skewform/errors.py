"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when it
serializes failures to stderr.
"""

from __future__ import annotations


class SkewformError(Exception):
    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ValidationError(SkewformError, ValueError):
    """Bad user input: rejected before any computation."""

    code = "validation"


class DomainError(ValidationError):
    code = "domain"


class DegenerateEnergyError(ValidationError):
    """mu = 0: the energy reduces to the length functional."""

    code = "degenerate-energy"


class InconsistentBranchError(ValidationError):
    code = "inconsistent-branch"


class NumericalError(SkewformError, ArithmeticError):
    code = "numerical"


class BudgetExceededError(NumericalError):
    code = "budget-exceeded"


class ToleranceError(NumericalError):
    code = "tolerance-failure"


class PoleSingularityError(NumericalError):
    code = "pole-singularity"


class DivergenceError(NumericalError):
    code = "divergence"


class NoSignChangeError(NumericalError):
    code = "no-sign-change"

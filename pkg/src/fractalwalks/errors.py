"""Exception hierarchy shared by all modules.

Every error carries a stable machine-readable ``code`` (used by the CLI's
error JSON) and an ``exit_code`` (2 for input/precondition problems, 3 for
numerical failures).
"""


class FractalWalksError(Exception):
    code = "error"
    exit_code = 1


class ValidationError(FractalWalksError):
    code = "validation-error"
    exit_code = 2


class NumericalError(FractalWalksError):
    code = "numerical-error"
    exit_code = 3


class InvalidGeneration(ValidationError):
    code = "invalid-generation"


class GenerationTooLarge(ValidationError):
    code = "generation-too-large"


class NotDualizable(ValidationError):
    code = "not-dualizable"


class NoInnerHole(ValidationError):
    code = "no-inner-hole"


class BudgetExceeded(ValidationError):
    code = "budget-exceeded"


class MissingEigenvectors(ValidationError):
    code = "missing-eigenvectors"


class UnknownEigenvalue(ValidationError):
    code = "unknown-eigenvalue"


class InvalidTrapNode(ValidationError):
    code = "invalid-trap-node"


class EmptySeries(ValidationError):
    code = "empty-series"


class InsufficientDecades(ValidationError):
    code = "insufficient-decades"


class TooFewMaxima(ValidationError):
    code = "too-few-maxima"


class BadGraphFile(ValidationError):
    code = "bad-graph-file"


class ConvergenceFailure(NumericalError):
    code = "convergence-failure"

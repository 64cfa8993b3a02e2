"""Exception hierarchy shared by all modules.

Every solver-side failure derives from :class:`SolverError` so the CLI can map
it to exit code 3 in one place.
"""


class SolverError(RuntimeError):
    """Base class for numerical failures."""


class StepSizeUnderflow(SolverError):
    pass


class InsufficientData(SolverError):
    pass


class Undecided(SolverError):
    pass


class BracketInvalid(SolverError):
    pass


class MaxIterations(SolverError):
    pass


class NoPlateau(SolverError):
    pass


class NoGlueWindow(SolverError):
    pass


class FitDegenerate(SolverError):
    pass


class Unavailable(SolverError):
    pass


class BasisTooCoarse(SolverError):
    pass


class GramSingular(SolverError):
    pass


class CoefficientsUnavailable(SolverError):
    pass


class QuadratureNoConvergence(SolverError):
    pass


class IndexOutOfTable(SolverError):
    pass


class TableTooSmall(SolverError):
    pass


class ToleranceFailure(SolverError):
    pass


class PNotInDisk(SolverError):
    pass


class LeftDisk(SolverError):
    pass


class InadmissibleInvariants(SolverError):
    pass

"""Exception types shared across the toolkit."""


class DivarkError(Exception):
    """Base class for all toolkit errors."""


class NotHermitian(DivarkError):
    pass


class ConvergenceFailure(DivarkError):
    pass


class SingularResolvent(DivarkError):
    pass


class GramMismatch(DivarkError):
    pass


class RankDeficientSamples(DivarkError):
    pass


class EmptyVariety(DivarkError):
    pass


class TraceUnstable(DivarkError):
    pass


class ZeroOnBoundary(DivarkError):
    pass


class NotRegular(DivarkError):
    pass


class NotDiagonalizable(DivarkError):
    pass


class UnimodularEigenvalue(DivarkError):
    pass


class IndefiniteGram(DivarkError):
    pass


class CertificateViolation(DivarkError):
    pass


class PerturbationFailed(DivarkError):
    pass


class NotPositiveDefinite(DivarkError):
    pass


class Inconclusive(DivarkError):
    pass


class NotExtremal(DivarkError):
    pass


class NoActiveKernelFound(DivarkError):
    pass


class NullSpaceDegenerate(DivarkError):
    pass


class DegenerateFormula(DivarkError):
    pass

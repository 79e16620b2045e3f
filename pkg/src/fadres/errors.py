"""Exception hierarchy.

Two families: input/precondition errors derive from ``ValueError`` (the CLI
maps them to exit code 2) and numerical failures derive from
``ArithmeticError`` (exit code 3).
"""


class FadresError(Exception):
    """Base class for every error raised by this package."""


class InputError(FadresError, ValueError):
    pass


class NumericalError(FadresError, ArithmeticError):
    pass


class DomainError(InputError):
    pass


class BranchError(InputError):
    """Momentum off the principal branch of the loop integral."""


class PoleOutsideInterval(InputError):
    pass


class NoSignChange(InputError):
    pass


class NonConvergence(NumericalError):
    pass


class DerivativeVanished(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


class ResonanceSingularity(SingularMatrix):
    """The three-body denominator vanishes: an exact resonance point."""

    def __init__(self, message, t0=None, rho=None):
        super().__init__(message)
        self.t0 = t0
        self.rho = rho


class EtaPole(NumericalError):
    """Real-axis pole of the two-body amplitude."""


class NoPoleFound(NumericalError):
    pass


class SingularPath(NonConvergence):
    def __init__(self, message, t0_values=()):
        super().__init__(message)
        self.t0_values = list(t0_values)

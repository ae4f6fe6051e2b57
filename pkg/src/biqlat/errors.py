"""Exception hierarchy shared by all biqlat modules."""


class BiqlatError(Exception):
    """Base class for domain errors raised by this package."""


class NotSquarefree(BiqlatError):
    pass


class DegenerateField(BiqlatError):
    pass


class UnsupportedCase(BiqlatError):
    pass


class NotOddPrime(BiqlatError):
    pass


class NotCompletelySplit(BiqlatError):
    pass


class SingularSystem(BiqlatError):
    pass


class InfeasibleProfile(BiqlatError):
    pass


class DimensionTooLarge(BiqlatError):
    pass


class LengthMismatch(BiqlatError):
    pass


class InconsistentDecisions(BiqlatError):
    pass


class RankDeficientChannel(BiqlatError):
    pass


class SingularBasis(BiqlatError):
    pass


class EpsOutOfRange(BiqlatError):
    pass


class ConfigFileError(BiqlatError):
    """Malformed simulation config file; message carries the line number."""

"""Exception hierarchy shared by all modules."""


class PovmFidError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(PovmFidError, ValueError):
    pass


class NoConvergence(PovmFidError, RuntimeError):
    pass


class DimMismatch(PovmFidError, ValueError):
    pass


class TooLarge(PovmFidError, ValueError):
    """Raised when a tensor-power construction exceeds the resource guard."""


class NotRank1(PovmFidError, ValueError):
    pass


class NotOneDesign(PovmFidError, ValueError):
    pass


class BadCount(PovmFidError, ValueError):
    pass


class DomainError(PovmFidError, ValueError):
    pass


class DegenerateMoments(PovmFidError, ValueError):
    pass


class BiasedInput(PovmFidError, ValueError):
    pass


class InvalidPovm(PovmFidError, ValueError):
    pass

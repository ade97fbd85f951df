"""Exception hierarchy shared by all modules."""


class MPSUpError(Exception):
    """Base class for errors raised by :mod:`mpsup`."""


class InvalidInput(MPSUpError, ValueError):
    pass


class TooLarge(MPSUpError):
    """A dense object would exceed the configured amplitude cap."""


class NotNormal(MPSUpError):
    pass


class PeriodUndetected(MPSUpError):
    pass


class DecompositionFailed(MPSUpError):
    pass


class NotNormalOrBug(MPSUpError):
    """Injectivity search exhausted its theoretical bound."""


class DecompositionSuspect(MPSUpError):
    """Block-injectivity search exhausted its theoretical bound."""


class NotInjective(MPSUpError):
    pass


class NotBlockInjective(MPSUpError):
    pass


STRUCTURAL_ERRORS = (
    NotNormal,
    PeriodUndetected,
    DecompositionFailed,
    NotNormalOrBug,
    DecompositionSuspect,
    NotInjective,
    NotBlockInjective,
)

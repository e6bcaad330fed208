"""Exception hierarchy shared by all modules."""


class WijsumError(ValueError):
    """Base class for invalid input to any wijsum routine."""


class DimensionMismatch(WijsumError):
    pass


class NonFiniteError(WijsumError):
    pass


class NonMonotoneError(WijsumError):
    """An index method failed strict monotonicity."""


class MissingCompanion(WijsumError):
    pass


class HorizonExceeded(WijsumError):
    """A transform needs trace values beyond the materialized horizon."""


class MissingTarget(WijsumError):
    pass


class HorizonTooSmall(WijsumError):
    pass


class MissingParameter(WijsumError):
    pass


class ParseError(WijsumError):
    pass

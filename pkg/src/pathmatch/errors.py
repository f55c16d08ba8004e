"""Exception types raised by pathmatch."""


class PathMatchError(Exception):
    """Base class for all library errors."""


class InvalidArgument(PathMatchError, ValueError):
    pass


class GenerationFailed(PathMatchError):
    """A random graph or noise sample could not be produced."""


class NumericalFailure(PathMatchError, ArithmeticError):
    pass


class ParseError(PathMatchError, ValueError):
    """Malformed input file; ``position`` locates the offending token or line."""

    def __init__(self, message, source=None, position=None, unit="offset"):
        self.source = source
        self.position = position
        where = []
        if source is not None:
            where.append(str(source))
        if position is not None:
            where.append(f"{unit} {position}")
        if where:
            message = f"{': '.join(where)}: {message}"
        super().__init__(message)


class SizeLimit(PathMatchError):
    pass


class UndefinedNormalization(PathMatchError, ArithmeticError):
    pass


class UnsupportedInstance(PathMatchError):
    pass


class SpectralDegeneracy(PathMatchError):
    """Shared eigenvalues make the Newton initialization singular."""

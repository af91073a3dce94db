"""Exception hierarchy shared by all modules."""


class SemiHelixError(Exception):
    """Base class for every error raised by this package."""


class DegenerateBasis(SemiHelixError):
    pass


class EvaluationFailure(SemiHelixError):
    pass


class RankDeficient(SemiHelixError):
    """Jacobian fails the singular-value gate (point is not immersed)."""


class OrientationConflict(SemiHelixError):
    pass


class WindowViolation(SemiHelixError, ValueError):
    pass


class TangentDegenerate(SemiHelixError):
    """The tangential part of the direction vanishes (angle at +-pi/2)."""


class DomainExit(SemiHelixError):
    pass


class FitFailure(SemiHelixError):
    pass


class DegenerateGeometry(FitFailure):
    """Collinear or coincident points handed to a circle fit."""


class EmptySlice(SemiHelixError):
    pass


class InsufficientData(SemiHelixError, ValueError):
    pass


class ParseError(SemiHelixError, ValueError):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class ValidationError(SemiHelixError, ValueError):
    pass

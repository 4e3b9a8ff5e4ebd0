"""Exception types raised across the package."""


class DomainError(ValueError):
    """Invalid grid geometry (too small, known data on the frame, ...)."""


class NoDirichletDataError(ValueError):
    """The known region has no boundary layer, so the hard-constraint system is singular."""


class SingularWeightError(ValueError):
    """The weight vanishes everywhere; the pure Neumann operator has a constant nullspace."""


class MethodMismatchError(ValueError):
    """CG was requested for a system that is not flagged symmetric."""


class BreakdownError(RuntimeError):
    """BiCGSTAB hit a zero denominator.

    The best iterate found so far is kept on ``best`` so that callers can
    fall back to another method.
    """

    def __init__(self, message, best=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class ExhaustionEmptyError(ValueError):
    """An exhaustion set X_k is empty; the grid is too coarse for the requested levels."""


class FieldFormatError(ValueError):
    """Malformed PGM/CSV input. ``offset`` is the byte offset where parsing failed."""

    def __init__(self, kind, offset, detail=""):
        self.kind = kind
        self.offset = offset
        msg = f"{kind} at byte offset {offset}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)

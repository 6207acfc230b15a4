"""Exception hierarchy shared by the solver modules."""


class TrigBVPError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(TrigBVPError, ValueError):
    pass


class InvalidPaddingError(InvalidInputError):
    pass


class OutOfDomainError(TrigBVPError, ValueError):
    pass


class EvaluationError(TrigBVPError, ArithmeticError):
    """A user function produced a non-finite value.

    ``index`` is the offending grid index when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class AmbiguousRankError(TrigBVPError):
    """Singular values straddle the rank cut-off too closely to classify."""

    def __init__(self, message, candidate_ranks):
        super().__init__(message)
        self.candidate_ranks = tuple(candidate_ranks)


class NonConvergenceError(TrigBVPError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class SingularJacobianError(TrigBVPError):
    def __init__(self, message, rank=None, trace=()):
        super().__init__(message)
        self.rank = rank
        self.trace = list(trace)


class BlowUpError(TrigBVPError, ArithmeticError):
    def __init__(self, message, last_valid_step):
        super().__init__(message)
        self.last_valid_step = last_valid_step


class ShootingFailure(TrigBVPError):
    def __init__(self, message, last_guess=None, mismatch=None):
        super().__init__(message)
        self.last_guess = last_guess
        self.mismatch = mismatch

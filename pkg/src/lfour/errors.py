"""Exception types shared across the package.

The CLI maps UsageError to exit code 2 and MathCheckError (a numerical
assertion that failed) to exit code 1; everything else is a genuine bug.
"""


class UsageError(ValueError):
    """Invalid arguments or an inconsistent configuration."""


class MathCheckError(AssertionError):
    """A numerical verification failed beyond its tolerance."""


class ConfluentCharactersError(UsageError):
    """A character pairing is principal, so an L(1, .) factor is a pole."""


class TruncationError(RuntimeError):
    """A truncated sum could not meet its error budget."""

    def __init__(self, message, best_estimate=None, bound=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.bound = bound


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its budget."""

    def __init__(self, message, best_estimate=None, bound=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.bound = bound

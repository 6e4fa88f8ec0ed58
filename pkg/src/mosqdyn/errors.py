"""Exception hierarchy shared by all modules."""


class ModelError(ValueError):
    """Base class for every error raised by :mod:`mosqdyn`."""


class NonFiniteInput(ModelError):
    pass


class SignConstraintViolated(ModelError):
    pass


class InvalidParams(ModelError):
    """Parameters violate the quadrant-invariance conditions required by W0."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("parameters violate: " + "; ".join(self.violations))


class LeftQuadrant(ModelError):
    """A step produced a state with a negative coordinate."""

    def __init__(self, state):
        self.state = state
        super().__init__(f"state left the nonnegative quadrant: {state!r}")


class NotAFixedPoint(ModelError):
    pass


class DegenerateDenominator(ModelError):
    pass


class PreconditionError(ModelError):
    pass


class MaxIterExceeded(ModelError):
    def __init__(self, message, last=None, iterations=None):
        self.last = last
        self.iterations = iterations
        super().__init__(message)


class HorizonTooShort(ModelError):
    pass


class NoTailFound(ModelError):
    pass


class InvariantViolation(AssertionError):
    """A property guaranteed by the model's theory failed numerically."""

"""Exception types shared across the package."""

from __future__ import annotations


class TruncationError(RuntimeError):
    """A series tail bound cannot be pushed below the requested tolerance.

    Carries the degree that was reached and the tail bound achieved there so
    callers can decide whether to retry with a looser tolerance.
    """

    def __init__(self, message: str, degree: int, tail: float):
        super().__init__(message)
        self.degree = degree
        self.tail = tail


class HyperplaneProximityError(ValueError):
    """A finite-difference stencil was requested too close to a reflecting
    hyperplane, where the difference quotients amplify rounding."""

    def __init__(self, message: str, root):
        super().__init__(message)
        self.root = root


class ConfigError(ValueError):
    """Configuration text failed to parse or validate.

    ``violations`` lists every problem found, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))

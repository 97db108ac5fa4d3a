"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain on which a quantity is defined."""


class ConvergenceError(RuntimeError):
    """A numerical procedure stopped before reaching its tolerance.

    ``estimate`` and ``error`` carry the best result obtained.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class InvalidSpreadError(ValueError):
    """The inter-transmission spread is too wide for some spreading factor."""

    def __init__(self, message, sf=None):
        super().__init__(message)
        self.sf = sf


class DegenerateStreamError(ValueError):
    """The air-time does not fit inside the longest inter-transmission gap."""


class DegenerateFitError(ValueError):
    """Moments admit no Beta distribution (zero or maximal variance).

    ``kind`` is ``"point_mass"`` when m2 <= m1**2 and ``"two_point"`` when
    m2 >= m1.
    """

    def __init__(self, message, kind):
        super().__init__(message)
        self.kind = kind

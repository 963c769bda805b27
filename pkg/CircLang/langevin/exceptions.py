from typing import Any


class CircLangError(Exception):
    """Base class for every error raised by the langevin app."""


class DomainError(CircLangError):
    """An input lies outside the domain where the requested formula is defined."""


class ValidityError(DomainError):
    """The Riccati solution u left the positive half-line."""


class PoleError(CircLangError):
    """Evaluation too close to a zero of f, where ratio = (χ+ix)/f has a pole."""


class BranchError(CircLangError):
    """A continuous lift cannot be carried through the requested point."""


class CancellationError(CircLangError):
    def __init__(self, message: str, ratio: float):
        super().__init__(message)
        # Sum of absolute period contributions over the absolute result.
        self.ratio = ratio


class ConvergenceError(CircLangError):
    def __init__(self, message: str, result: Any = None):
        super().__init__(message)
        self.result = result

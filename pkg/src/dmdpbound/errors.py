"""Exception hierarchy shared by every module."""


class DmdpError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DmdpError, ValueError):
    """A mean lies outside the admissible interval of its reward family."""


class StructuralError(DmdpError, ValueError):
    """Malformed graph input: empty cycle, broken walk, empty cycle set."""


class CycleLimitError(DmdpError, RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"simple-cycle enumeration exceeded the cap of {cap} cycles")
        self.cap = cap


class InfeasibleError(DmdpError, ValueError):
    """The confusing-reward slice has no admissible point."""


class UnsupportedError(DmdpError, ValueError):
    """Input outside the supported problem class (mixed families, ...)."""


class NonDisjointError(UnsupportedError):
    """Two simple cycles share a state-action pair."""


class DegenerateOptimumError(DmdpError, ValueError):
    """Several cycles attain the optimal gain."""


class NotCommunicatingError(DmdpError, ValueError):
    pass


class PolicyContractError(DmdpError, RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class RatioUndefinedError(DmdpError, ValueError):
    pass

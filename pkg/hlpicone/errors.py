from typing import Any, Dict, Optional


class HLPiconeError(Exception):
    """Base class of every error raised by hlpicone."""


class DomainError(HLPiconeError, ValueError):
    pass


class ExprSyntaxError(HLPiconeError, ValueError):
    def __init__(self, message: str, offset: int, expected: str = ""):
        self.offset = offset
        self.expected = expected
        text = f"{message} at offset {offset}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class UnknownIdentifierError(HLPiconeError, ValueError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier '{name}' at offset {offset}")


class SingularCoefficientError(HLPiconeError, ArithmeticError):
    def __init__(self, name: str, x: float):
        self.name = name
        self.x = x
        super().__init__(f"coefficient {name} vanishes at x={x!r}")


class StepSizeUnderflowError(HLPiconeError, ArithmeticError):
    def __init__(self, x: float, h: float):
        self.x = x
        self.h = h
        super().__init__(
            f"step size underflow at x={x!r} (h={h:.3e}); "
            "the solution is probably singular there"
        )


class EmptyDomainError(HLPiconeError, ValueError):
    pass


class NotFoundError(HLPiconeError, RuntimeError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.details = details or {}
        super().__init__(message)


class PreconditionError(HLPiconeError, ValueError):
    pass


class VariantError(HLPiconeError, ValueError):
    pass


class ProblemFileError(HLPiconeError, ValueError):
    pass

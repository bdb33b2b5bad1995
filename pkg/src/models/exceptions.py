"""
Exception hierarchy for sygsolve
"""

from typing import Optional


class SygusError(Exception):
    """Base class for every error raised by the solver library"""


class ParseError(SygusError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        """
        Initialize a positioned parse error

        Args:
            message: Human readable description
            line: 1-based line of the offending token (0 when unknown)
            column: 1-based column of the offending token (0 when unknown)
        """
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}" if line else message)


class LegacySyntaxError(ParseError):
    """SyGuS-IF v1 construct found where only v2 is accepted"""


class UnsupportedOperatorError(ParseError):
    """Operator outside the supported signature table"""


class SortError(SygusError):
    def __init__(self, message: str, expression: Optional[str] = None):
        self.message = message
        self.expression = expression
        if expression:
            message = f"{message} in {expression}"
        super().__init__(message)


class NonLinearError(SortError):
    """Multiplication of two non-literal terms"""


class EvaluationError(SygusError):
    """Raised when a term cannot be given a value"""


class UnboundVariableError(EvaluationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable: {name}")


class UnrepairedConstantError(EvaluationError):
    def __init__(self):
        super().__init__("unrepaired constant slot")

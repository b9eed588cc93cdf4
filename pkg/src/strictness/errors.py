"""Exceptions shared by the checkers, evaluators and front end."""


class StrictnessError(Exception):
    """Base class for everything this package raises on bad input."""


class IllegalAttribute(StrictnessError):
    pass


class ScopeMismatch(StrictnessError):
    pass


class UnknownVariable(StrictnessError):
    pass


class CheckError(StrictnessError):
    """A program is rejected by one of the type-and-effect checkers."""


class UnboundVariable(CheckError):
    pass


class TypeMismatch(CheckError):
    pass


class SubsumptionNotBelow(CheckError):
    pass


class IllFormedType(CheckError):
    pass


class ScopeEscape(CheckError):
    pass


class NotAThunk(CheckError):
    pass


class NotAFunction(CheckError):
    pass


class NotAReturner(CheckError):
    pass


class BranchTypeMismatch(TypeMismatch):
    pass


class GenerationExhausted(StrictnessError):
    pass


class ParseError(StrictnessError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col

"""
Exception hierarchy for the enclosure library
"""


class IvsolveError(Exception):
    """Base class for every error raised by ivsolve."""


# ==================== Interval core ====================

class ZeroInDivisor(IvsolveError):
    pass


class EmptyIntervalError(IvsolveError):
    pass


class EmptyBoxError(IvsolveError):
    pass


class DegenerateAxis(IvsolveError):
    pass


# ==================== Model input ====================

class ModelError(IvsolveError):
    """Malformed model text or an inconsistent SystemModel."""


class ModelSyntaxError(ModelError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ArityError(ModelError):
    pass


class UnknownIdentifier(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class DivByZero(IvsolveError):
    pass


# ==================== Linear algebra ====================

class DimensionTooLarge(IvsolveError):
    pass


class SingularEnclosure(IvsolveError):
    pass


class PivotContainsZero(IvsolveError):
    pass


class VerificationFailed(IvsolveError):
    pass


class SingularMatrix(IvsolveError):
    pass


# ==================== Solvers / bench / CLI ====================

class InvalidConfig(IvsolveError):
    pass


class BudgetExceeded(IvsolveError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MissingParameter(IvsolveError):
    pass


class UnknownModel(IvsolveError):
    pass


class UnknownSuite(IvsolveError):
    pass

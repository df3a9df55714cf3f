"""Exception types shared across the package.

Every error carries a short ``code`` string; the CLI reports it verbatim in
its ``{"error": code, "message": text}`` payload.
"""


class ModelError(Exception):
    code = "ModelError"


class InvalidParameters(ModelError, ValueError):
    code = "InvalidParameters"


class ZeroPopulation(ModelError, ZeroDivisionError):
    code = "ZeroPopulation"


class InvalidFraction(ModelError, ValueError):
    code = "InvalidFraction"


class DegenerateRc(ModelError, ValueError):
    code = "DegenerateRc"


class NoEndemicEquilibrium(ModelError):
    code = "NoEndemicEquilibrium"


class InvalidTheta(ModelError, ValueError):
    code = "InvalidTheta"


class NotAnEquilibrium(ModelError, ValueError):
    code = "NotAnEquilibrium"


class DomainError(ModelError, ValueError):
    code = "DomainError"


class NegativeStateBlowup(ModelError, ArithmeticError):
    code = "NegativeStateBlowup"


class StepSizeUnderflow(ModelError, ArithmeticError):
    code = "StepSizeUnderflow"


class NoConvergence(ModelError):
    code = "NoConvergence"

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ParseError(ModelError, ValueError):
    code = "ParseError"


class GapError(ModelError, ValueError):
    code = "GapError"


class ConsistencyError(ModelError, ValueError):
    code = "ConsistencyError"


class BudgetExhausted(ModelError):
    code = "BudgetExhausted"


class UnknownParameter(ModelError, KeyError):
    code = "UnknownParameter"

    def __str__(self):
        # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""

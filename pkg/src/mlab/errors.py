"""Exception hierarchy.

Every error carries enough context to be reported as a machine-readable
JSON object by the command-line front end (see :meth:`MlabError.to_dict`).
"""


class MlabError(Exception):
    """Base class for all package errors."""

    code = "MlabError"

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": self.message}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value


class ValidationError(MlabError):
    code = "ValidationError"


class DimensionError(ValidationError):
    code = "DimensionError"


class NotHermitian(ValidationError):
    code = "NotHermitian"


class NotPositive(ValidationError):
    code = "NotPositive"


class TraceNotOne(ValidationError):
    code = "TraceNotOne"


class NotUnitary(ValidationError):
    code = "NotUnitary"


class NotNormalized(ValidationError):
    code = "NotNormalized"


class NotIsometry(ValidationError):
    code = "NotIsometry"


class AnalysisError(MlabError):
    code = "AnalysisError"


class UndefinedEntry(AnalysisError):
    code = "UndefinedEntry"


class PositivityViolation(AnalysisError):
    code = "PositivityViolation"


class GramNotNonnegative(AnalysisError):
    code = "GramNotNonnegative"


class FactorizationNotFound(AnalysisError):
    code = "FactorizationNotFound"


class InconsistentFactorization(AnalysisError):
    code = "InconsistentFactorization"


class NoEraserFound(AnalysisError):
    code = "NoEraserFound"


class NotEraser(AnalysisError):
    code = "NotEraser"


class BoundViolated(AnalysisError):
    code = "BoundViolated"

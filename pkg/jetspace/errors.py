from typing import Optional


class JetspaceError(ValueError):
    """Root of every engine failure. `stage` tags the pipeline step that raised."""

    stage = "engine"

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        if stage:
            self.stage = stage


class FieldDivisionError(JetspaceError, ZeroDivisionError):
    stage = "coeff_field"


class PolynomialSyntaxError(JetspaceError):
    stage = "parse"

    def __init__(self, message: str, text: str = "", column: int = 0):
        super().__init__(f"{message} at column {column}: {text!r}")
        self.text = text
        self.column = column


class ZeroPolynomialError(JetspaceError):
    stage = "multipoly"


class MissingAssignmentError(JetspaceError):
    stage = "multipoly"


class MissingWeightError(JetspaceError):
    stage = "multipoly"


class TruncationOrderError(JetspaceError):
    stage = "jets"


class UnsupportedPatternError(JetspaceError):
    stage = "jets"


class DepthExhaustedError(JetspaceError):
    stage = "jets"


class BudgetExceededError(JetspaceError):
    """Raised when a Gröbner run or a configuration search hits its cap."""

    stage = "groebner"

    def __init__(self, message: str, steps: int = 0, basis_size: int = 0, explored: int = 0):
        super().__init__(message)
        self.steps = steps
        self.basis_size = basis_size
        self.explored = explored


class UnitIdealError(JetspaceError):
    stage = "groebner"


class EmptyExclusionSetError(JetspaceError):
    stage = "groebner"


class NotNegativeDefiniteError(JetspaceError):
    stage = "valuative"


class FixtureError(JetspaceError):
    stage = "fixture"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        location = f" (line {line}, column {column})" if line else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


class CaseScriptError(JetspaceError):
    stage = "wedge"

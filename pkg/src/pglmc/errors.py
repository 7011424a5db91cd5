"""Exception types shared across the package.

Errors are grouped loosely into data problems (bad inputs, malformed files,
degenerate geometry) and solver problems (iteration budget, infeasibility).
The CLI maps the groups onto distinct exit codes.
"""


class PglmcError(Exception):
    """Base class for every error raised by this package."""


class EmptyInput(PglmcError):
    """An operation received an empty collection where data was required."""


class LengthMismatch(PglmcError):
    """Two paired sequences have different lengths."""


class DimensionMismatch(PglmcError):
    """A vector or matrix has the wrong number of feature dimensions."""


class MissingClass(PglmcError):
    """A computation needs both labels but one class is absent."""


class TooFewSamples(PglmcError):
    """Not enough samples for the requested split or fit."""


class ZeroVector(PglmcError):
    """A direction vector with zero norm was passed where an angle is needed."""


class DegenerateMeans(PglmcError):
    """The two class means coincide, so the population direction is undefined."""


class DegenerateDirection(PglmcError):
    """Training produced a zero weight vector; no direction separates the data."""


class InfeasibleProblem(PglmcError):
    """The dual constraints admit no feasible point."""


class MaxIterationsExceeded(PglmcError):
    """The solver hit its iteration budget before reaching the tolerance.

    Carries the best iterate found so far so callers can inspect how close
    the solver got.
    """

    def __init__(self, message: str, solution=None):
        super().__init__(message)
        self.solution = solution


class AllCandidatesFailed(PglmcError):
    """Every hyperparameter candidate failed during tuning."""


class ParseError(PglmcError):
    """A delimited file could not be parsed.

    ``row`` and ``column`` locate the offending cell when known (1-based row
    counting includes the header line).
    """

    def __init__(self, message: str, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonNumericFeature(ParseError):
    """A feature cell does not parse as a floating point number."""


class MissingLabelColumn(PglmcError):
    """The requested label column does not exist in the table."""


class UnknownPositiveClass(PglmcError):
    """The requested positive class value is absent from the label column."""


#: Errors caused by the data handed to the program (CLI exit code 2).
DATA_ERRORS = (
    EmptyInput,
    LengthMismatch,
    DimensionMismatch,
    MissingClass,
    TooFewSamples,
    ZeroVector,
    DegenerateMeans,
    DegenerateDirection,
    InfeasibleProblem,
    ParseError,
    MissingLabelColumn,
    UnknownPositiveClass,
)

#: Errors raised while optimizing (CLI exit code 3).
SOLVER_ERRORS = (
    MaxIterationsExceeded,
    AllCandidatesFailed,
)

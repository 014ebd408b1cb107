"""Custom exceptions raised by the liqarch package.

Exceptions
----------
LiqarchError
    Base class for all custom liqarch exceptions.
LiqarchWarning
    Base class for all custom liqarch warnings.
InvalidArgumentError
    Raised when invalid argument is passed to a function.
ArgumentWarning
    Used for warnings of problematic argument choices.
MalformedRowError
    Base class for minute CSV rows that violate the bar invariants.
ConfigError
    Raised for unusable run configurations.
PipelineError
    Raised when a pipeline stage fails; names the stage.
"""


class LiqarchError(Exception):
    pass


class LiqarchWarning(Warning):
    pass


class InvalidArgumentError(LiqarchError):
    pass


class ArgumentWarning(LiqarchWarning):
    pass


class MissingColumnError(InvalidArgumentError):
    pass


class MalformedRowError(InvalidArgumentError):
    """A minute CSV row that cannot become a MinuteBar."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class BadTimestampError(MalformedRowError):
    pass


class NonPositivePriceError(MalformedRowError):
    pass


class NegativeAmountError(MalformedRowError):
    pass


class UnsortedInputError(InvalidArgumentError):
    pass


class TooFewBarsError(InvalidArgumentError):
    pass


class EmptyInputError(InvalidArgumentError):
    pass


class LengthMismatchError(InvalidArgumentError):
    pass


class AllZeroReturnsError(LiqarchError):
    pass


class AllZeroAmountsError(LiqarchError):
    pass


class NonFiniteError(InvalidArgumentError):
    pass


class TooShortError(InvalidArgumentError):
    pass


class DomainError(InvalidArgumentError):
    pass


class NonStationaryParamsError(DomainError):
    pass


class DegenerateVarianceError(LiqarchError):
    pass


class AllFailedError(LiqarchError):
    pass


class ZeroVarianceError(LiqarchError):
    pass


class TooFewGroupsError(InvalidArgumentError):
    pass


class MisalignmentError(InvalidArgumentError):
    pass


class DegenerateVolatilityError(LiqarchError):
    pass


class ConfigError(LiqarchError):
    pass


class PipelineError(LiqarchError):
    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage

"""Exception types shared across the package."""


class CfcError(Exception):
    """Base class for all errors raised by cfcdenoise."""


class ParameterError(CfcError, ValueError):
    """A scalar argument is outside its valid range (cutoffs, std, weights...)."""


class DimensionError(CfcError, ValueError):
    """Image or tensor shapes do not satisfy an operation's requirements."""


class FormatError(CfcError, ValueError):
    """A file exists but is not in a supported format."""


class ContractError(CfcError, RuntimeError):
    """An API was called with state it did not produce (e.g. a stale cache)."""


class DivergenceError(CfcError, ArithmeticError):
    """Training produced a non-finite loss. Carries the offending iteration."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"non-finite loss at iteration {iteration}")

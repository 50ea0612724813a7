"""Exception types shared across the package.

Attacks distinguish three failure regimes: invalid inputs (caller bugs,
raised eagerly), model-loading problems (bad files, raised with the
offending field named), and budget exhaustion (a normal termination
signal that attacks catch and convert into a truncated trace).
"""


class HopSkipJumpError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HopSkipJumpError, ValueError):
    """An argument violates an operation's precondition."""


class ModelLoadError(HopSkipJumpError, ValueError):
    """A serialized model file is malformed; message names the field."""


class QueryBudgetExceededError(HopSkipJumpError):
    """The oracle's query cap is spent.

    Not a crash: attacks catch this and return the best iterate found
    so far.
    """


class InitializationFailedError(HopSkipJumpError):
    """The untargeted blend scan exhausted its redraw budget."""


class InvalidInitializationError(HopSkipJumpError, ValueError):
    """A caller-supplied starting point is not adversarial."""


class StepSearchFailedError(HopSkipJumpError):
    """Geometric step halving underflowed without finding success."""

    def __init__(self, message: str, queries: int = 0):
        super().__init__(message)
        self.queries = queries


class DegenerateSuccessError(HopSkipJumpError):
    """An adversarial iterate coincides with the original sample."""


class UnsupportedExperimentError(HopSkipJumpError, ValueError):
    """The requested experiment needs capabilities the oracle lacks."""


class BenchmarkSpecError(HopSkipJumpError, ValueError):
    """A benchmark spec failed validation; message lists every field."""

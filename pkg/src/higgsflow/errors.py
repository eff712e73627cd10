"""Exception hierarchy shared by all modules."""


class HiggsFlowError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(HiggsFlowError, ValueError):
    """Input parameters violate a documented precondition."""


class HiggsValidationError(HiggsFlowError, ValueError):
    """A graded Higgs bundle violates the arrow invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class GridShapeError(HiggsFlowError, ValueError):
    """Operation needs a chain-sum object but got a grid-shaped one."""


class UnstableInputError(HiggsFlowError, ValueError):
    pass


class ExponentRangeError(HiggsFlowError, ValueError):
    """Nilpotency exponent lies outside the range 0..p-1."""


class NotDescendedError(HiggsFlowError, ValueError):
    """A degree is not divisible by p, so the object cannot be a Frobenius pullback."""


class OutOfModelError(HiggsFlowError, ValueError):
    pass


class BoundsError(HiggsFlowError, ValueError):
    """Brute-force enumeration requested beyond its supported size."""


class InternalInconsistency(HiggsFlowError, AssertionError):
    """A machine check on an emitted object failed; indicates a bug."""

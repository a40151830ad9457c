"""Exception hierarchy shared by all disklab modules."""


class DisklabError(Exception):
    """Base class for every error raised by disklab."""


class InvalidSpecError(DisklabError, ValueError):
    """An operator description is malformed (bad weights, bad dimension, ...)."""


class DimensionError(DisklabError, ValueError):
    """Vector and operator dimensions do not agree."""


class ContractError(DisklabError, ValueError):
    """An input violates a documented precondition (non-Hermitian, non-unit, ...)."""


class HypothesisViolation(DisklabError, ValueError):
    """A criterion or transfer hypothesis fails on the supplied data.

    The message names the inequality that failed.
    """


class UnsupportedFamilyError(DisklabError, NotImplementedError):
    """The requested operation has no implementation for this operator family."""


class CapacityError(DisklabError):
    """The truncation dimension is too small for the requested construction.

    ``required_dim`` holds the smallest dimension that would work.
    """

    def __init__(self, msg, required_dim):
        super().__init__(msg)
        self.required_dim = required_dim


class NumericError(DisklabError, ArithmeticError):
    """A numerical routine failed to meet its accuracy guarantee."""


class OrbitOverflowError(NumericError, OverflowError):
    """An iterate exceeded the overflow threshold."""


class ConfigurationError(DisklabError, ValueError):
    """Reports or configs passed together are inconsistent."""

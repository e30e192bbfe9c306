"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Matrix dimensions do not match the declared bipartite or block shape."""


class ContractError(ValueError):
    """An input violates a documented precondition (Hermiticity, context, ...)."""


class FaithfulnessError(ContractError):
    """A density matrix required to be faithful has a (near-)zero eigenvalue."""


class DimensionLimitError(ValueError):
    """A requested dense dimension exceeds the configured maximum."""


class ConditioningError(ArithmeticError):
    """A modular-power scaling would overflow for the requested exponent."""


class ConsistencyError(RuntimeError):
    """Two independent computation routes disagree beyond tolerance."""
